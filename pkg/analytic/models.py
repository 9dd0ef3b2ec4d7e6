from dataclasses import dataclass, field

import numpy as np

from core.models import GuardEvent, NormalizedState, Regime


@dataclass(frozen=True)
class RegimeSegment:
    """
    One stretch of closed-form evolution.

    ``constants`` are the integration constants fixed at ``t_start`` in
    segment-local time: A1/B1 without exchange, A2/B2 when one country
    exports (labels follow the exporter), s0/d_star/D when both do.
    """
    regime: Regime
    t_start: float
    t_end: float
    state_start: NormalizedState
    state_end: NormalizedState
    constants: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PiecewiseTrajectory:
    segments: tuple
    horizon: float
    econ: object

    @property
    def regimes(self):
        return [segment.regime for segment in self.segments]

    @property
    def boundaries(self):
        return [segment.t_end for segment in self.segments[:-1]]

    @property
    def final_state(self):
        return self.segments[-1].state_end

    @property
    def events(self):
        events = []
        for before, after in zip(self.segments, self.segments[1:]):
            for component, was, now in (
                ('eta_a', before.regime.a_above, after.regime.a_above),
                ('eta_b', before.regime.b_above, after.regime.b_above),
            ):
                if was != now:
                    events.append(GuardEvent(after.t_start, component, 'upward' if now else 'downward'))
        return events

    def segment_indices(self, times):
        starts = np.array([segment.t_start for segment in self.segments])
        return np.maximum(np.searchsorted(starts, times, side='right') - 1, 0)

    def segment_at(self, t):
        return self.segments[int(self.segment_indices(t))]

    def state_at(self, t):
        # Imported here: solutions builds trajectories from this module.
        from .solutions import propagate

        segment = self.segment_at(t)
        if t == segment.t_end:
            return segment.state_end
        return propagate(segment.regime, segment.state_start, self.econ, t - segment.t_start)

    def sample(self, times):
        """Stocks at ``times`` as an (n, 2) array."""
        from .solutions import regime_laws

        times = np.asarray(times, dtype=float)
        values = np.empty((len(times), 2))
        indices = self.segment_indices(times)
        for index in np.unique(indices):
            segment = self.segments[index]
            rows = np.flatnonzero(indices == index)
            law_a, law_b, _ = regime_laws(segment.regime, segment.state_start, self.econ)
            taus = times[rows] - segment.t_start
            values[rows, 0] = law_a.values(taus)
            values[rows, 1] = law_b.values(taus)
            ends = rows[times[rows] == segment.t_end]
            values[ends] = (segment.state_end.eta_a, segment.state_end.eta_b)
        return values
