"""Two-input Mamdani fuzzy inference with singleton outputs.

The pipeline is the classic three stages: triangular fuzzification over an
adjacent-overlap partition, min/max rule inference, and weighted-average
defuzzification over crisp per-term output values.  Controllers built from
these pieces are immutable and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class InferenceError(RuntimeError):
    """Raised when no rule fires, which a well-formed controller cannot reach."""


@dataclass(frozen=True)
class MembershipFamily:
    """Ordered linguistic terms over one input universe.

    Each term peaks (membership 1) at its breakpoint and falls linearly to 0
    at the neighbouring breakpoints; the first and last terms are shoulders
    that stay at 1 beyond their peaks.  By construction the memberships over
    all terms sum to 1 everywhere on the universe.
    """

    labels: tuple[str, ...]
    breakpoints: tuple[float, ...]
    universe: tuple[float, float]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.breakpoints):
            raise ValueError("one breakpoint per term label required")
        if len(self.labels) < 2:
            raise ValueError("a family needs at least two terms")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate term labels: {self.labels}")
        lo, hi = self.universe
        if not lo < hi:
            raise ValueError(f"empty universe [{lo}, {hi}]")
        bps = self.breakpoints
        for i in range(1, len(bps)):
            if not bps[i] > bps[i - 1]:
                raise ValueError(f"breakpoints not strictly increasing: {bps}")
        if bps[0] < lo or bps[-1] > hi:
            raise ValueError(f"breakpoints {bps} outside universe [{lo}, {hi}]")

    def clamp(self, x: float) -> float:
        lo, hi = self.universe
        return lo if x < lo else hi if x > hi else x


def fuzzify(x: float, family: MembershipFamily) -> dict[str, float]:
    """Memberships of x in every term of the family; inputs clamp at the universe.

    At most two adjacent terms are nonzero and the memberships sum to 1.
    """
    x = family.clamp(x)
    bps = family.breakpoints
    mu = {label: 0.0 for label in family.labels}
    if x <= bps[0]:
        mu[family.labels[0]] = 1.0
        return mu
    if x >= bps[-1]:
        mu[family.labels[-1]] = 1.0
        return mu
    for i in range(len(bps) - 1):
        lo, hi = bps[i], bps[i + 1]
        if lo <= x <= hi:
            rising = (x - lo) / (hi - lo)
            mu[family.labels[i]] = 1.0 - rising
            mu[family.labels[i + 1]] = rising
            return mu
    raise AssertionError("unreachable: clamped x not bracketed by breakpoints")


@dataclass(frozen=True)
class RuleTable:
    """Complete rule grid: one output label per (first-input, second-input) pair."""

    a_labels: tuple[str, ...]
    b_labels: tuple[str, ...]
    cells: dict[tuple[str, str], str] = field(compare=False)

    def __post_init__(self) -> None:
        for a in self.a_labels:
            for b in self.b_labels:
                if (a, b) not in self.cells:
                    raise ValueError(f"rule table missing cell ({a}, {b})")
        if len(self.cells) != len(self.a_labels) * len(self.b_labels):
            extra = set(self.cells) - {
                (a, b) for a in self.a_labels for b in self.b_labels
            }
            raise ValueError(f"rule table has cells outside the grid: {sorted(extra)}")

    @classmethod
    def from_rows(cls, rows: dict[str, dict[str, str]]) -> "RuleTable":
        """Build from {a_label: {b_label: out_label}} nested mapping."""
        a_labels = tuple(rows)
        b_labels = tuple(next(iter(rows.values())))
        cells = {(a, b): rows[a][b] for a in a_labels for b in b_labels}
        return cls(a_labels=a_labels, b_labels=b_labels, cells=cells)

    def output_labels(self) -> set[str]:
        return set(self.cells.values())


@dataclass(frozen=True)
class SingletonOutputs:
    """Crisp output value per consequent term, strictly increasing across terms."""

    labels: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.values):
            raise ValueError("one value per output label required")
        for i in range(1, len(self.values)):
            if not self.values[i] > self.values[i - 1]:
                raise ValueError(f"singleton values not increasing: {self.values}")

    def value(self, label: str) -> float:
        return self.values[self.labels.index(label)]


@dataclass(frozen=True)
class FuzzyController:
    input_a: MembershipFamily
    input_b: MembershipFamily
    rules: RuleTable
    outputs: SingletonOutputs

    def __post_init__(self) -> None:
        if self.rules.a_labels != self.input_a.labels:
            raise ValueError("rule rows do not match the first input's terms")
        if self.rules.b_labels != self.input_b.labels:
            raise ValueError("rule columns do not match the second input's terms")
        unknown = self.rules.output_labels() - set(self.outputs.labels)
        if unknown:
            raise ValueError(f"rule outputs without singleton values: {sorted(unknown)}")


def infer(controller: FuzzyController, a: float, b: float) -> dict[str, float]:
    """Fire every rule with min() conjunction, max-aggregate per output label."""
    mu_a = fuzzify(a, controller.input_a)
    mu_b = fuzzify(b, controller.input_b)
    activations: dict[str, float] = {}
    for la, wa in mu_a.items():
        if wa == 0.0:
            continue
        for lb, wb in mu_b.items():
            if wb == 0.0:
                continue
            strength = wa if wa < wb else wb
            out = controller.rules.cells[(la, lb)]
            if strength > activations.get(out, 0.0):
                activations[out] = strength
    return activations


def defuzzify(activations: dict[str, float], outputs: SingletonOutputs) -> float:
    """Activation-weighted average of the singleton output values."""
    num = 0.0
    den = 0.0
    for label, w in activations.items():
        if w > 0.0:
            num += w * outputs.value(label)
            den += w
    if den == 0.0:
        raise InferenceError("no rule fired; inference state should be unreachable")
    # w*s/w can exceed s by one ulp; keep the contract that the output stays
    # inside the singleton range
    return min(max(num / den, outputs.values[0]), outputs.values[-1])


def evaluate(controller: FuzzyController, a: float, b: float) -> float:
    return defuzzify(infer(controller, a, b), controller.outputs)
