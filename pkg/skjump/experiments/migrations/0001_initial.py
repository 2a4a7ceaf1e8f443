from django.db import migrations, models
import django.utils.timezone


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('experiment', models.CharField(max_length=32)),
                ('model', models.CharField(max_length=64)),
                ('config_hash', models.CharField(db_index=True, max_length=64)),
                ('seed', models.CharField(max_length=20)),
                ('aborts', models.PositiveIntegerField(default=0)),
                ('out_dir', models.CharField(max_length=1024, verbose_name='Output directory')),
                ('status', models.CharField(choices=[('completed', 'Completed'), ('aborted', 'Aborted (non-finite paths)'), ('failed', 'Failed')], default='completed', max_length=16)),
                ('manifest', models.JSONField(blank=True, default=dict)),
                ('created_date', models.DateTimeField(default=django.utils.timezone.now)),
            ],
            options={
                'verbose_name': 'Experiment Run',
                'verbose_name_plural': 'Experiment Runs',
                'ordering': ('-created_date', '-pk'),
            },
        ),
    ]
