from collections.abc import Mapping

from rest_framework import serializers

from dynamics.builtins import BUILTIN_MODELS
from dynamics.serializers import StrictSerializer, finite
from integrate.malliavin import FieldKind
from integrate.trajectories import DIRECT, EXPONENTIAL

STRONG_RATE = 'strong_rate'
KOLMOGOROV_RATE = 'kolmogorov_rate'
MALLIAVIN_CHECK = 'malliavin_check'
INVERSE_NORM = 'inverse_norm'
ASSUMPTIONS = 'assumptions'

EXPERIMENTS = (STRONG_RATE, KOLMOGOROV_RATE, MALLIAVIN_CHECK, INVERSE_NORM,
               ASSUMPTIONS)
# experiments that fit a rate in epsilon
RATE_EXPERIMENTS = (STRONG_RATE, KOLMOGOROV_RATE, MALLIAVIN_CHECK)

# t_eval may miss a node by this fraction of dt
GRID_TOLERANCE = 1e-9

COUPLED = 'coupled'
INDEPENDENT = 'independent'


class CommaListField(serializers.ListField):
    """ListField that also accepts the comma separated form of config files.

    References:
        * https://www.django-rest-framework.org/api-guide/fields/#listfield

    """

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)


class ThreadsField(serializers.Field):
    """A worker count >= 1, or 'auto' for one worker per CPU."""

    default_error_messages = {
        'invalid': 'Must be a positive integer or "auto".',
    }

    def to_internal_value(self, data):
        text = str(data).strip().lower()
        if text == 'auto':
            return 'auto'
        try:
            value = int(text)
        except ValueError:
            self.fail('invalid')
        if value < 1:
            self.fail('invalid')
        return value

    def to_representation(self, value):
        return value


class ModelSelectionSerializer(serializers.Serializer):
    """The `model.*` section: a built-in model name and its parameters.

    Every key except `name` is a model parameter and is validated by the
    parameter serializer of that model.

    Methods:
        to_internal_value: returns ``{'name': ..., 'params': {...}}``.

    """

    name = serializers.ChoiceField(choices=sorted(BUILTIN_MODELS))

    def to_internal_value(self, data):
        if not isinstance(data, Mapping):
            raise serializers.ValidationError(
                {'name': ['Expected model.name and model parameters.']})
        params = dict(data)
        head = {'name': params.pop('name')} if 'name' in params else {}
        validated = super().to_internal_value(head)
        serializer_class = BUILTIN_MODELS[validated['name']][0]
        serializer = serializer_class(data=params)
        if not serializer.is_valid():
            raise serializers.ValidationError(serializer.errors)
        validated['params'] = dict(serializer.validated_data)
        return validated


class RunSerializer(StrictSerializer):
    """The `run.*` section.

    Fields:
        T: horizon, > 0
        n_steps: steps of the coarse (limit) grid
        t_eval: evaluation times in (0, T], each a grid node, default T
        epsilons: small masses in (0, 1), sorted descending on output
        n_paths: coupled paths per epsilon
        p_values: moment orders
        sk_scheme: 'exponential' (default) or 'direct'
        seed: run seed, 0 <= seed < 2**64
        threads: worker processes or 'auto'; the CLI flag overrides it
        ks_coupling: 'coupled' or 'independent' ensembles for KS
        kinds: Malliavin field kinds to estimate

    """

    T = serializers.FloatField(default=1.0, validators=[finite])
    n_steps = serializers.IntegerField(min_value=1, default=1000)
    t_eval = CommaListField(child=serializers.FloatField(validators=[finite]),
                            required=False)
    epsilons = CommaListField(
        child=serializers.FloatField(validators=[finite]), default=list)
    n_paths = serializers.IntegerField(min_value=1, default=1000)
    p_values = CommaListField(
        child=serializers.FloatField(validators=[finite]),
        default=lambda: [2.0])
    sk_scheme = serializers.ChoiceField(choices=(EXPONENTIAL, DIRECT),
                                        default=EXPONENTIAL)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1,
                                    default=0)
    threads = ThreadsField(required=False)
    ks_coupling = serializers.ChoiceField(choices=(COUPLED, INDEPENDENT),
                                          default=COUPLED)
    kinds = CommaListField(
        child=serializers.ChoiceField(choices=[k.value for k in FieldKind]),
        default=lambda: [FieldKind.BROWNIAN.value])

    def validate_T(self, value):
        if value <= 0:
            raise serializers.ValidationError('T must be > 0.')
        return value

    def validate_epsilons(self, value):
        bad = [eps for eps in value if not 0 < eps < 1]
        if bad:
            raise serializers.ValidationError(
                'Every epsilon must lie in (0, 1); got {}.'.format(bad))
        if len(set(value)) != len(value):
            raise serializers.ValidationError('Epsilons must be distinct.')
        return sorted(value, reverse=True)

    def validate_kinds(self, value):
        if not value:
            raise serializers.ValidationError('Name at least one kind.')
        return list(dict.fromkeys(value))

    def validate(self, attrs):
        T = attrs['T']
        t_eval = attrs.get('t_eval') or [T]
        bad = [t for t in t_eval if not 0 < t <= T]
        if bad:
            raise serializers.ValidationError(
                {'t_eval': ['Times must lie in (0, T = {}]; got {}.'.format(
                    T, bad)]})
        dt = T / attrs['n_steps']
        off_grid = [t for t in t_eval
                    if abs(t / dt - round(t / dt)) > GRID_TOLERANCE]
        if off_grid:
            raise serializers.ValidationError(
                {'t_eval': ['Times must be grid nodes, multiples of dt = '
                             '{:.6g}; got {}.'.format(dt, off_grid)]})
        attrs['t_eval'] = sorted(set(t_eval))
        return attrs


class AssumptionProbeSerializer(StrictSerializer):
    """The `assumptions.*` section: where (H1)/(H2) are probed."""

    x_min = serializers.FloatField(default=-10.0, validators=[finite])
    x_max = serializers.FloatField(default=10.0, validators=[finite])
    n_probes = serializers.IntegerField(min_value=1, default=1000)

    def validate(self, attrs):
        if not attrs['x_min'] < attrs['x_max']:
            raise serializers.ValidationError(
                {'x_max': ['x_max must exceed x_min.']})
        return attrs


class ExperimentConfigSerializer(StrictSerializer):
    """A whole experiment config, parsed from dotted key = value lines.

    Fields:
        experiment: one of EXPERIMENTS
        model: ModelSelectionSerializer
        run: RunSerializer, optional
        assumptions: AssumptionProbeSerializer, optional

    Methods:
        validate: rate experiments need >= 3 epsilons; p must be >= 2, or
            >= 1 for inverse_norm.

    References:
        * https://www.django-rest-framework.org/api-guide/relations/#nested-relationships

    """

    experiment = serializers.ChoiceField(choices=EXPERIMENTS)
    model = ModelSelectionSerializer()
    run = RunSerializer()
    assumptions = AssumptionProbeSerializer()

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            data = dict(data)
            data.setdefault('run', {})
            data.setdefault('assumptions', {})
        return super().to_internal_value(data)

    def validate(self, attrs):
        experiment = attrs['experiment']
        run = attrs['run']
        errors = {}
        if experiment in RATE_EXPERIMENTS and len(run['epsilons']) < 3:
            errors['epsilons'] = [
                '{} fits a rate and needs at least 3 epsilons.'.format(
                    experiment)]
        p_min = 1 if experiment == INVERSE_NORM else 2
        if not run['p_values']:
            errors['p_values'] = ['Name at least one p.']
        elif min(run['p_values']) < p_min:
            errors['p_values'] = [
                'p must be >= {} for {}.'.format(p_min, experiment)]
        if errors:
            raise serializers.ValidationError({'run': errors})
        return attrs
