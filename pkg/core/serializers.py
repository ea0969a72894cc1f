"""
Serializers shared by the services and the commands.

ConfigSerializer validates run configurations; the manifest and report
serializers check the JSON documents the toolkit writes and reads back.
"""

from rest_framework import serializers

from core.models.field_model import is_power_of_two

TOLERANCE_KEYS = ("SOLVER_TOL", "REPLACE_TOL", "PROBE_REPLACE_TOL", "JACOBIAN_FLOOR", "NOISE_FLOOR", "CAUCHY_TOL")


class PairField(serializers.ListField):
    """Two floats, given as a list or as ``"a,b"`` text."""

    child = serializers.FloatField()

    def __init__(self, **kwargs):
        super().__init__(min_length=2, max_length=2, **kwargs)

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [part.strip() for part in data.split(",") if part.strip()]
        return super().to_internal_value(data)


class OptionalFloatField(serializers.FloatField):
    """Float that also accepts ``None`` and the empty string as unset."""

    def __init__(self, **kwargs):
        super().__init__(allow_null=True, required=False, **kwargs)

    def validate_empty_values(self, data):
        if data in ("", "None", "none"):
            return True, None
        return super().validate_empty_values(data)


class ConfigSerializer(serializers.Serializer):
    GRID_SIZE = serializers.IntegerField(min_value=8)
    TIME_SAMPLES = serializers.IntegerField(min_value=3)
    EPSILON_1 = serializers.FloatField()
    EPSILON_0 = OptionalFloatField()
    EPSILON_SU = serializers.FloatField()
    DELTA = serializers.FloatField(min_value=0.0)
    DELTA_0 = serializers.FloatField(min_value=0.0)
    DELTA_DECAY = serializers.FloatField(min_value=0.0, max_value=1.0)
    SOLVER_TOL = serializers.FloatField()
    SOLVER_MAX_ITER = serializers.IntegerField(min_value=1)
    REPLACE_TOL = serializers.FloatField()
    REPLACE_MAX_ITER = serializers.IntegerField(min_value=1)
    PROBE_REPLACE_TOL = serializers.FloatField()
    JACOBIAN_FLOOR = serializers.FloatField()
    NOISE_FLOOR = serializers.FloatField()
    THREADS = serializers.IntegerField(min_value=1)
    SEED = serializers.IntegerField(min_value=0)
    TARGET = serializers.CharField()
    SCENARIO = serializers.CharField()
    OUTPUT_DIR = serializers.CharField()
    ROUNDS = serializers.IntegerField(min_value=1)
    SMOOTH_WIDTH = serializers.FloatField(min_value=0.0)
    PATCH_CENTER = PairField()
    PATCH_RADIUS = serializers.FloatField(min_value=0.0)
    CONTINUITY_FACTOR = serializers.FloatField(min_value=0.0)
    HOMOTOPY_SAMPLES = serializers.IntegerField(min_value=2)
    PROPERTY_STAR_SAMPLES = serializers.IntegerField(min_value=1)
    DEGENERATE_THRESHOLD = serializers.FloatField(min_value=1.0)
    TREND_WINDOW = serializers.IntegerField(min_value=2)
    CAUCHY_TOL = serializers.FloatField()
    BUBBLE_RADIUS_FACTOR = serializers.FloatField(min_value=1.0)
    NECK_DELTA = serializers.FloatField(min_value=0.0)
    NU = serializers.FloatField(min_value=0.0)

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ["Unknown configuration key."] for key in unknown})
        return super().to_internal_value(data)

    def validate_GRID_SIZE(self, value):
        if not is_power_of_two(value):
            raise serializers.ValidationError(f"Grid size must be a power of two, got {value}.")
        return value

    def validate_TARGET(self, value):
        from core.models import TARGETS

        if value not in TARGETS:
            raise serializers.ValidationError(f"Unknown target '{value}'. Available: {', '.join(sorted(TARGETS))}.")
        return value

    def validate(self, attrs):
        errors = {}
        if not 0.0 < attrs["EPSILON_1"] < attrs["EPSILON_SU"]:
            errors["EPSILON_1"] = ["Need 0 < epsilon_1 < epsilon_SU."]
        if attrs.get("EPSILON_0") is not None and not 0.0 < attrs["EPSILON_0"] <= attrs["EPSILON_1"]:
            errors["EPSILON_0"] = ["Need 0 < epsilon_0 <= epsilon_1."]
        for key in TOLERANCE_KEYS:
            if not attrs[key] > 0.0:
                errors[key] = ["Tolerances must be positive."]
        if errors:
            raise serializers.ValidationError(errors)
        attrs.setdefault("EPSILON_0", None)
        return attrs


class ManifestSerializer(serializers.Serializer):
    """``manifest.json`` of a saved sweepout."""

    format = serializers.ChoiceField(choices=["minmax-sweepout/1"])
    grid = serializers.ListField(child=serializers.IntegerField(min_value=8), min_length=2, max_length=2)
    times = serializers.ListField(child=serializers.FloatField(), min_length=2)
    marks = serializers.ListField(child=PairField())
    slices = serializers.ListField(child=serializers.CharField())
    endpoint_kinds = serializers.ListField(child=serializers.CharField(), min_length=2, max_length=2)
    target = serializers.DictField()

    def validate(self, attrs):
        if not len(attrs["times"]) == len(attrs["marks"]) == len(attrs["slices"]):
            raise serializers.ValidationError("times, marks and slices must have the same length.")
        if "name" not in attrs["target"]:
            raise serializers.ValidationError({"target": ["Target description needs a name."]})
        return attrs


class BubbleSerializer(serializers.Serializer):
    center = PairField()
    scales = serializers.ListField(child=serializers.FloatField())
    energy = serializers.FloatField()
    depth = serializers.IntegerField(min_value=1)
    children = serializers.ListField(child=serializers.DictField(), required=False)


class BubbleReportSerializer(serializers.Serializer):
    """Report written by the bubble analysis."""

    verdict = serializers.ChoiceField(choices=["converged", "degenerate", "inconclusive"])
    tau_sequence = serializers.ListField(child=PairField())
    limit = PairField(allow_null=True, required=False)
    systoles = serializers.ListField(child=serializers.FloatField(), required=False)
    bubbles = BubbleSerializer(many=True)
    body_energy = serializers.FloatField()
    neck_energy = serializers.FloatField()
    total_energy = serializers.FloatField()
    identity_residual = serializers.FloatField(min_value=0.0)


class RoundRecordSerializer(serializers.Serializer):
    """One row of the per-round history."""

    round = serializers.IntegerField(min_value=0)
    maxE = serializers.FloatField()
    maxArea = serializers.FloatField()
    gap = serializers.FloatField()
    worst_property_star = serializers.FloatField()
