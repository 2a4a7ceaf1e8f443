from django.db import models
from django.urls import reverse
from django.utils import timezone


class ExperimentRun(models.Model):
    """Registry entry for one `run` command.

    Fields:
        experiment: experiment name, e.g. `strong_rate`.
        model: built-in model name.
        config_hash: sha256 of the semantic config fields.
        seed: run seed. Stored as text since it may exceed a signed 64 bit
            integer.
        aborts: number of path evaluations that went non-finite.
        out_dir: directory the results were written to.
        status: `completed`, `aborted` or `failed`.
        manifest: the manifest.json of the run.
        created_date: when the run finished.

    References:
        * https://docs.djangoproject.com/en/4.2/ref/models/fields/#jsonfield

    """

    COMPLETED = 'completed'
    ABORTED = 'aborted'
    FAILED = 'failed'
    STATUS_CHOICES = (
        (COMPLETED, 'Completed'),
        (ABORTED, 'Aborted (non-finite paths)'),
        (FAILED, 'Failed'),
    )

    class Meta:
        verbose_name = 'Experiment Run'
        verbose_name_plural = 'Experiment Runs'
        ordering = ('-created_date', '-pk')

    experiment = models.CharField(
        max_length=32,
    )

    model = models.CharField(
        max_length=64,
    )

    config_hash = models.CharField(
        max_length=64,
        db_index=True,
    )

    seed = models.CharField(
        max_length=20,
    )

    aborts = models.PositiveIntegerField(
        default=0,
    )

    out_dir = models.CharField(
        'Output directory',
        max_length=1024,
    )

    status = models.CharField(
        max_length=16,
        choices=STATUS_CHOICES,
        default=COMPLETED,
    )

    manifest = models.JSONField(
        default=dict,
        blank=True,
    )

    created_date = models.DateTimeField(
        default=timezone.now,
    )

    def __str__(self):
        return '{} on {} ({})'.format(self.experiment, self.model,
                                      self.config_hash[:12])

    def get_absolute_url(self):
        return reverse('experimentrun-detail', args=[self.pk])

    @classmethod
    def record(cls, config, bundle, status=COMPLETED):
        """Store the outcome of a run that wrote ``bundle``."""
        return cls.objects.create(
            experiment=config.experiment,
            model=config.model_name,
            config_hash=config.config_hash,
            seed=str(config.seed),
            aborts=bundle.aborts,
            out_dir=bundle.out_dir,
            status=status,
            manifest=bundle.manifest,
        )
