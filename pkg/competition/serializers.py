"""Serializers for run configs and the stored-run API.

``RunConfigSerializer`` validates the JSON run config shared by every
management command. The model serializers expose stored runs read-only.
"""

from django.conf import settings
from rest_framework import serializers

from .degrees import DegreeSource, load_degree_sequence, validate_pmf
from .ensemble import ExperimentConfig
from .exceptions import DegreeSequenceError
from .models import ExperimentRun, ReplicaResult

COMMANDS = ('generate', 'compete', 'ensemble', 'branching', 'verify')


def competition_setting(name):
    """Read one engine default from ``settings.COMPETITION`` at call time."""
    return lambda: settings.COMPETITION[name]


class StrictSerializer(serializers.Serializer):
    """Rejects keys the serializer does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError(
                    {key: ['Unknown configuration key.'] for key in unknown}
                )
        return super().to_internal_value(data)


class DegreeSourceSerializer(StrictSerializer):
    """Where degrees come from: an explicit list, a degree file or an IID pmf.

    Fields:
        kind: explicit, file or iid
        values: degree list (explicit)
        path: degree file (file)
        pmf: degree -> probability (iid)
    """
    kind = serializers.ChoiceField(choices=['explicit', 'file', 'iid'])
    values = serializers.ListField(child=serializers.IntegerField(), required=False)
    path = serializers.CharField(required=False)
    pmf = serializers.DictField(child=serializers.FloatField(min_value=0.0), required=False)

    required_by_kind = {'explicit': 'values', 'file': 'path', 'iid': 'pmf'}

    def validate(self, attrs):
        needed = self.required_by_kind[attrs['kind']]
        if needed not in attrs:
            raise serializers.ValidationError({needed: [f"Required for kind '{attrs['kind']}'."]})
        try:
            if attrs['kind'] == 'iid':
                attrs['pmf'] = validate_pmf(attrs['pmf'])
            elif attrs['kind'] == 'explicit':
                load_degree_sequence(attrs['values'])
        except DegreeSequenceError as error:
            raise serializers.ValidationError({needed: [str(error)]})
        return attrs


def _is_vertex_list(value):
    if isinstance(value, bool):
        return False
    if isinstance(value, int):
        return value >= 0
    return isinstance(value, list) and bool(value) and all(
        isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in value
    )


class RunConfigSerializer(StrictSerializer):
    """Schema (version 1) of the run config.

    Every key is optional except ``seed``: there is no clock-based seeding.
    Missing keys take the defaults below, so ``validated_data`` is the fully
    resolved config echoed into every output.
    """
    schema_version = serializers.IntegerField(default=1)
    command = serializers.ChoiceField(choices=COMMANDS, required=False)
    degrees = DegreeSourceSerializer(required=False)
    n = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    lambda1 = serializers.FloatField(default=1.0)
    lambda2 = serializers.FloatField(default=1.0)
    seeds = serializers.JSONField(default='uniform')
    replicas = serializers.IntegerField(min_value=1, default=1)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1)
    nu = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    epsilon = serializers.FloatField(default=0.1)
    out = serializers.CharField(default='out')
    thinning = serializers.IntegerField(min_value=1, default=competition_setting('TRAJECTORY_THINNING'))
    full_steps = serializers.IntegerField(min_value=0, default=competition_setting('FULL_TRAJECTORY_STEPS'))
    simple = serializers.BooleanField(default=False)
    fixed_sequence = serializers.BooleanField(default=False)
    max_attempts = serializers.IntegerField(min_value=1, default=competition_setting('MAX_SIMPLE_ATTEMPTS'))
    workers = serializers.IntegerField(min_value=1, default=competition_setting('WORKERS'))
    n_values = serializers.ListField(child=serializers.IntegerField(min_value=1), default=list)
    a1 = serializers.IntegerField(min_value=1, default=1)
    a2 = serializers.IntegerField(min_value=1, default=1)
    offspring = serializers.DictField(child=serializers.FloatField(min_value=0.0), required=False)
    t_end = serializers.FloatField(min_value=0.0, default=10.0)
    t_sample = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)

    def validate_schema_version(self, value):
        expected = settings.COMPETITION['SCHEMA_VERSION']
        if value != expected:
            raise serializers.ValidationError(f"Unsupported schema version {value}; expected {expected}.")
        return value

    def validate_lambda1(self, value):
        if value <= 0:
            raise serializers.ValidationError("Intensity must be positive.")
        return value

    validate_lambda2 = validate_lambda1

    def validate_epsilon(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("epsilon must lie in (0, 1).")
        return value

    def validate_seeds(self, value):
        if value == 'uniform':
            return value
        if isinstance(value, list) and len(value) == 2 and all(_is_vertex_list(v) for v in value):
            return value
        raise serializers.ValidationError(
            "Use 'uniform' or a pair of vertex ids (each an id or a list of ids)."
        )

    def validate(self, attrs):
        degrees = attrs.get('degrees')
        if degrees and degrees['kind'] == 'iid' and attrs.get('n') is None:
            raise serializers.ValidationError({'n': ['Required with an IID degree source.']})
        return attrs

    def degree_source(self):
        degrees = self.validated_data.get('degrees')
        if degrees is None:
            raise serializers.ValidationError({'degrees': ['This command needs a degree source.']})
        try:
            return DegreeSource.from_config(degrees)
        except (OSError, ValueError, DegreeSequenceError) as error:
            raise serializers.ValidationError({'degrees': [str(error)]})

    def seed_pairs(self):
        seeds = self.validated_data['seeds']
        if seeds == 'uniform':
            return seeds
        return tuple(tuple(s) if isinstance(s, list) else s for s in seeds)

    def experiment_config(self):
        """The :class:`~competition.ensemble.ExperimentConfig` of a validated config."""
        data = self.validated_data
        source = self.degree_source()
        return ExperimentConfig(
            degree_source=source,
            n=data['n'] if data['n'] is not None else len(source.values),
            lambda1=data['lambda1'], lambda2=data['lambda2'],
            replicas=data['replicas'], seed=data['seed'],
            n_values=tuple(data['n_values']), seeds=self.seed_pairs(),
            nu=data['nu'], epsilon=data['epsilon'],
            thinning=data['thinning'], full_steps=data['full_steps'],
            simple=data['simple'], fixed_sequence=data['fixed_sequence'],
            max_attempts=data['max_attempts'], workers=data['workers'],
            debug=settings.COMPETITION['DEBUG_INVARIANTS'],
        )


class ReplicaResultSerializer(serializers.ModelSerializer):
    """One stored replica row, read-only."""
    class Meta:
        model = ReplicaResult
        fields = [
            'index', 'n', 'total_edges', 'a1', 'a2', 'n1', 'n2', 'frac1', 'frac2',
            'sup_deviation', 'qv', 'min_growth', 'termination_step',
        ]
        read_only_fields = fields


class ExperimentRunSerializer(serializers.ModelSerializer):
    """Stored run without its replica rows."""

    replica_count = serializers.IntegerField(source='replicas.count', read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ['id', 'kind', 'seed', 'status', 'created_at', 'replica_count', 'config', 'summary']
        read_only_fields = fields


class ExperimentRunDetailSerializer(ExperimentRunSerializer):
    """Stored run with nested replica rows."""

    replicas = ReplicaResultSerializer(many=True, read_only=True)

    class Meta(ExperimentRunSerializer.Meta):
        fields = ExperimentRunSerializer.Meta.fields + ['replicas']
        read_only_fields = fields
