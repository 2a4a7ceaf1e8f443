import math
from collections.abc import Mapping

from rest_framework import serializers


def finite(value):
    """
    Reject NaN and infinite parameters.
    """
    if not math.isfinite(value):
        raise serializers.ValidationError('Must be a finite number.')


class StrictSerializer(serializers.Serializer):
    """Serializer that rejects keys it has no field for.

    Typos in config files must not silently fall back to defaults.
    """

    def to_internal_value(self, data):
        unknown = {}
        if isinstance(data, Mapping):
            unknown = {key: ['Unknown key.']
                       for key in sorted(set(data) - set(self.fields))}
        try:
            value = super().to_internal_value(data)
        except serializers.ValidationError as e:
            if unknown and isinstance(e.detail, Mapping):
                raise serializers.ValidationError({**e.detail, **unknown})
            raise
        if unknown:
            raise serializers.ValidationError(unknown)
        return value


class ModelParamsSerializer(StrictSerializer):
    """Base serializer for built-in model parameters.

    Fields:
        x0: initial position, defaults to 0
        y0: initial velocity of the second-order system, defaults to 0
        K: optional override of the (H1)/(H2) constant. Built-in models
            default to their exact constants.

    Methods:
        validate_K: K must be strictly positive.

    References:
        * https://www.django-rest-framework.org/api-guide/serializers/

    """

    x0 = serializers.FloatField(default=0.0, validators=[finite])
    y0 = serializers.FloatField(default=0.0, validators=[finite])
    K = serializers.FloatField(required=False, validators=[finite])

    def validate_K(self, value):
        if value <= 0:
            raise serializers.ValidationError('K must be > 0.')
        return value


class LinearJumpOUParamsSerializer(ModelParamsSerializer):
    """Parameters of b = -a x, sigma = s, c = gamma z."""

    a = serializers.FloatField(validators=[finite])
    s = serializers.FloatField(validators=[finite])
    gamma = serializers.FloatField(validators=[finite])
    lam = serializers.FloatField(min_value=0.0, validators=[finite])


class PureJumpParamsSerializer(ModelParamsSerializer):
    """Parameters of b = sigma = 0, c = z."""

    lam = serializers.FloatField(min_value=0.0, validators=[finite])
