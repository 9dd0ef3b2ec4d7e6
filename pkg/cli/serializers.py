from rest_framework import serializers

from core.models import (
    DepletionPolicy, GoodEconomy, MoneyState, NormalizedState, PriceSet, TwoGoodScenario,
    normalize_raw, validate_scenario,
)
from integrator.models import SolverOptions
from region.models import GridSpec
from steady.fixed_points import fixed_point_production

ONE_GOOD = 'one-good'
TWO_GOOD = 'two-good'

# Where each validate_scenario message belongs in the file.
VIOLATION_SECTIONS = {'prices1': 'prices1', 'prices2': 'prices2', 'eta_a1': 'good1', 'eta_b2': 'good2'}


class StrictSerializer(serializers.Serializer):
    """Rejects keys it does not declare, alongside the usual field errors."""

    unknown_message = 'Unknown key.'

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        errors = {}
        value = None
        try:
            value = super().to_internal_value(data)
        except serializers.ValidationError as exc:
            errors.update(exc.detail)
        for key in unknown:
            errors[key] = [self.unknown_message]
        if errors:
            raise serializers.ValidationError(errors)
        return value


class ModelSectionSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=[ONE_GOOD, TWO_GOOD])
    h0 = serializers.FloatField(required=False)

    def validate_h0(self, value):
        if not value > 0:
            raise serializers.ValidationError('h0 must be > 0.')
        return value


class GoodSectionSerializer(StrictSerializer):
    p_a = serializers.FloatField(required=False, min_value=0)
    p_b = serializers.FloatField(required=False, min_value=0)
    c_a = serializers.FloatField(min_value=0)
    c_b = serializers.FloatField(min_value=0)
    sigma = serializers.FloatField(required=False, min_value=0)
    eta_star = serializers.FloatField(required=False)


class PriceSectionSerializer(StrictSerializer):
    x_a = serializers.FloatField(min_value=0)
    x_b = serializers.FloatField(min_value=0)
    y = serializers.FloatField(min_value=0)


class InitialSectionSerializer(StrictSerializer):
    eta_a = serializers.FloatField()
    eta_b = serializers.FloatField()
    m_a = serializers.FloatField(default=0.0)
    m_b = serializers.FloatField(default=0.0)


class SolverSectionSerializer(StrictSerializer):
    horizon = serializers.FloatField()
    step = serializers.FloatField(default=1e-3)
    event_tol = serializers.FloatField(default=1e-10)
    depletion_policy = serializers.ChoiceField(choices=DepletionPolicy.values, default=DepletionPolicy.HALT.value)


class GridSectionSerializer(StrictSerializer):
    sigma1_min = serializers.FloatField()
    sigma1_max = serializers.FloatField()
    sigma1_steps = serializers.IntegerField(min_value=2)
    eta_min = serializers.FloatField()
    eta_max = serializers.FloatField()
    eta_steps = serializers.IntegerField(min_value=2)


class ScenarioSerializer(StrictSerializer):
    """
    A whole scenario file, section by section. ``errors`` maps every
    offending section to its offending keys, so one pass reports everything.
    """

    unknown_message = 'Unknown section.'

    model = ModelSectionSerializer(error_messages={'required': 'missing [model]'})
    good1 = GoodSectionSerializer(required=False)
    good2 = GoodSectionSerializer(required=False)
    prices1 = PriceSectionSerializer(required=False)
    prices2 = PriceSectionSerializer(required=False)
    initial = InitialSectionSerializer(required=False)
    solver = SolverSectionSerializer(required=False)
    grid = GridSectionSerializer(required=False)

    def validate(self, data):
        builder = _ScenarioBuilder(data)
        builder.build()
        if builder.errors:
            raise serializers.ValidationError(builder.errors)
        data['built'] = builder.fields
        return data

    def create(self, validated_data):
        # Imported here: scenario imports this module.
        from .scenario import Scenario

        return Scenario(**validated_data['built'])


class _ScenarioBuilder:
    """Turns validated sections into domain objects, collecting every violation."""

    def __init__(self, data):
        self.data = data
        self.kind = data['model']['kind']
        self.h0 = data['model'].get('h0')
        self.errors = {}
        self.fields = {'kind': self.kind}

    def fail(self, section, message):
        self.errors.setdefault(section, []).append(message)

    def normalized(self, values):
        if self.h0 is None:
            return dict(values)
        return normalize_raw(values, self.h0)

    def domain(self, section, factory, **kwargs):
        try:
            return factory(**kwargs)
        except Exception as exc:  # ValidationError or a numerical error
            messages = getattr(exc, 'message_dict', None)
            if messages:
                for key, texts in messages.items():
                    for text in texts:
                        self.fail(section, f'{key}: {text}')
            else:
                self.fail(section, str(exc))
            return None

    def build(self):
        for section in ('good1',) + (('good2', 'prices1', 'prices2') if self.kind == TWO_GOOD else ()):
            if section not in self.data:
                self.fail(section, f'missing [{section}]')
        if self.errors:
            return

        if self.kind == ONE_GOOD:
            self.build_one_good()
        else:
            self.build_two_good()

        if 'grid' in self.data:
            self.fields['grid'] = self.domain('grid', GridSpec, **self.data['grid'])
        if 'solver' in self.data:
            self.fields['solver'] = self.domain('solver', SolverOptions, **{
                **self.data['solver'],
                'depletion_policy': DepletionPolicy(self.data['solver']['depletion_policy']),
            })

    def build_one_good(self):
        for section in ('good2', 'prices2'):
            if section in self.data:
                self.fail(section, f'[{section}] is only allowed in two-good scenarios')

        good = self.normalized(self.data['good1'])
        if 'sigma' not in good:
            self.fail('good1', 'sigma: required in one-good scenarios')
            return
        consumption = self.domain(
            'good1', GoodEconomy, p_a=0.0, p_b=0.0, c_a=good['c_a'], c_b=good['c_b'], sigma=good['sigma'],
        )
        if consumption is None:
            return
        self.fields['consumption'] = consumption
        eta_star = good.pop('eta_star', None)
        if eta_star is not None:
            if 'p_a' in good or 'p_b' in good:
                self.fail('good1', 'give either p_a and p_b or eta_star, not both')
                return
            production = self.domain(
                'good1', fixed_point_production,
                eta_a_star=eta_star, c_a=good['c_a'], c_b=good['c_b'], sigma=good['sigma'],
            )
            if production is None:
                return
            good['p_a'], good['p_b'] = production
        elif ('p_a' in good) != ('p_b' in good):
            self.fail('good1', 'give both p_a and p_b')
            return

        self.fields['eta_star'] = eta_star
        if 'p_a' in good:
            # Without productions only fixed_point can use the scenario.
            self.fields['econ'] = self.domain('good1', GoodEconomy, **good)
        if 'prices1' in self.data:
            self.fields['prices'] = self.domain('prices1', PriceSet, **self.data['prices1'])
        if 'initial' in self.data:
            initial = self.data['initial']
            stocks = self.normalized({'eta_a': initial['eta_a'], 'eta_b': initial['eta_b']})
            self.fields['initial'] = self.domain('initial', NormalizedState, **stocks)
            self.fields['money0'] = MoneyState(initial['m_a'], initial['m_b'])

    def build_two_good(self):
        goods = {}
        for section in ('good1', 'good2'):
            good = self.normalized(self.data[section])
            eta_star = good.pop('eta_star', None)
            goods[section] = (self.domain(section, GoodEconomy, **{
                'p_a': good.get('p_a', 0.0), 'p_b': good.get('p_b', 0.0),
                'c_a': good['c_a'], 'c_b': good['c_b'], 'sigma': good.get('sigma', 0.0),
            }), eta_star)

        eta_a1 = goods['good1'][1]
        if eta_a1 is None:
            self.fail('good1', 'eta_star: required (fixed-point stock of good 1 in A)')
        eta_b2 = goods['good2'][1]
        if eta_b2 is None:
            eta_b2 = 2.0
        prices1 = self.domain('prices1', PriceSet, **self.data['prices1'])
        prices2 = self.domain('prices2', PriceSet, **self.data['prices2'])
        if self.errors:
            return

        scenario = TwoGoodScenario(
            good1=goods['good1'][0], good2=goods['good2'][0],
            prices1=prices1, prices2=prices2,
            eta_a1=eta_a1, eta_b2=eta_b2,
        )
        for message in validate_scenario(scenario):
            key = message.split(':')[0].split(' ')[0]
            self.fail(VIOLATION_SECTIONS.get(key, 'model'), message)
        self.fields['two_good'] = scenario
