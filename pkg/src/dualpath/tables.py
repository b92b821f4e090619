"""Moment tables for bosonic modes and measured envelopes.

Single-mode tables hold entries indexed by two non-negative integers.  For the
``"normal"`` ordering the entry ``(l, m)`` is the normally ordered moment
``<adag^l a^m>``; for the ``"antinormal"`` ordering it is ``<V^r Vdag^s>``
with ``(r, s) = (l, m)``, which is the natural indexing for amplifier noise
modes.  Joint tables carry one index pair per detection channel.

Tables are stored as dense complex arrays so that the recursion kernels can
work on raw memory; entries above the order cap are kept at zero and are not
reachable through :meth:`entry`.
"""

import json
import math

import numpy as np

__all__ = [
    "MomentTable",
    "JointMomentTable",
    "NoiseJointTable",
    "pairs_of_order",
    "antinormal_to_normal",
    "normal_to_antinormal",
]

MAX_ORDER_CAP = 8


def pairs_of_order(total):
    """All index pairs (l, m) with l + m == total."""
    return [(l, total - l) for l in range(total + 1)]


def _check_max_order(max_order):
    if not 1 <= max_order <= MAX_ORDER_CAP:
        raise ValueError(
            f"max_order must lie in [1, {MAX_ORDER_CAP}], got {max_order}"
        )


def _key(indices):
    return ",".join(str(i) for i in indices)


def _unkey(key, n):
    parts = key.split(",")
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated indices, got {key!r}")
    return tuple(int(p) for p in parts)


class MomentTable:
    """Triangular table of single-mode moments up to a total order cap.

    Args:
        max_order: largest total order l + m that the table holds.
        ordering: ``"normal"`` for ``<adag^l a^m>`` indexing, ``"antinormal"``
            for ``<V^r Vdag^s>`` indexing.
        data: optional (max_order+1, max_order+1) complex array; a fresh
            table with entry (0, 0) = 1 is created when omitted.
        errors: optional matching array of standard errors.
    """

    __slots__ = ("max_order", "ordering", "data", "errors")

    def __init__(self, max_order, ordering="normal", data=None, errors=None):
        _check_max_order(max_order)
        if ordering not in ("normal", "antinormal"):
            raise ValueError(f"unknown ordering {ordering!r}")
        shape = (max_order + 1, max_order + 1)
        if data is None:
            data = np.zeros(shape, dtype=np.complex128)
            data[0, 0] = 1.0
        else:
            data = np.asarray(data, dtype=np.complex128)
            if data.shape != shape:
                raise ValueError(f"data shape {data.shape} does not match {shape}")
            data = data.copy()
        if errors is not None:
            errors = np.asarray(errors, dtype=np.float64)
            if errors.shape != shape:
                raise ValueError(f"errors shape {errors.shape} does not match {shape}")
            errors = errors.copy()
        self.max_order = max_order
        self.ordering = ordering
        self.data = data
        self.errors = errors

    def _check_index(self, l, m):
        if l < 0 or m < 0 or l + m > self.max_order:
            raise IndexError(f"index ({l}, {m}) outside table of order {self.max_order}")

    def entry(self, l, m):
        self._check_index(l, m)
        return complex(self.data[l, m])

    def set_entry(self, l, m, value):
        self._check_index(l, m)
        self.data[l, m] = value

    def error(self, l, m):
        self._check_index(l, m)
        if self.errors is None:
            return None
        return float(self.errors[l, m])

    def items(self):
        """Yield ((l, m), value) over all stored entries, graded by order."""
        for t in range(self.max_order + 1):
            for l, m in pairs_of_order(t):
                yield (l, m), complex(self.data[l, m])

    def conjugation_residual(self):
        """Largest |entry(l, m) - conj(entry(m, l))| over the table."""
        residual = 0.0
        for (l, m), value in self.items():
            residual = max(residual, abs(value - np.conj(self.data[m, l])))
        return residual

    def copy(self):
        errors = None if self.errors is None else self.errors.copy()
        return MomentTable(self.max_order, self.ordering, self.data, errors)

    def to_dict(self):
        out = {
            "max_order": self.max_order,
            "ordering": self.ordering,
            "entries": {
                _key(idx): [value.real, value.imag] for idx, value in self.items()
            },
        }
        if self.errors is not None:
            out["errors"] = {
                _key(idx): float(self.errors[idx]) for idx, _ in self.items()
            }
        return out

    @classmethod
    def from_dict(cls, payload):
        table = cls(int(payload["max_order"]), payload.get("ordering", "normal"))
        for key, (re, im) in payload["entries"].items():
            l, m = _unkey(key, 2)
            table.set_entry(l, m, complex(re, im))
        if "errors" in payload:
            table.errors = np.zeros_like(table.data, dtype=np.float64)
            for key, err in payload["errors"].items():
                l, m = _unkey(key, 2)
                table.errors[l, m] = err
        return table

    def __repr__(self):
        return (
            f"MomentTable(max_order={self.max_order}, ordering={self.ordering!r})"
        )


class JointMomentTable:
    """Two-channel moment table indexed by (l1, m1, l2, m2).

    Entry (l1, m1, l2, m2) is the measured-envelope moment
    ``<S1dag^l1 S1^m1 S2dag^l2 S2^m2>`` (the envelopes commute, so the
    operator order is immaterial).  Entries are stored for total order
    l1 + m1 + l2 + m2 <= max_order.
    """

    __slots__ = ("max_order", "data", "errors", "n_shots")

    def __init__(self, max_order, data=None, errors=None, n_shots=None):
        _check_max_order(max_order)
        shape = (max_order + 1,) * 4
        if data is None:
            data = np.zeros(shape, dtype=np.complex128)
            data[0, 0, 0, 0] = 1.0
        else:
            data = np.asarray(data, dtype=np.complex128)
            if data.shape != shape:
                raise ValueError(f"data shape {data.shape} does not match {shape}")
            data = data.copy()
        if errors is not None:
            errors = np.asarray(errors, dtype=np.float64)
            if errors.shape != shape:
                raise ValueError(f"errors shape {errors.shape} does not match {shape}")
            errors = errors.copy()
        self.max_order = max_order
        self.data = data
        self.errors = errors
        self.n_shots = n_shots

    def _check_index(self, l1, m1, l2, m2):
        if min(l1, m1, l2, m2) < 0 or l1 + m1 + l2 + m2 > self.max_order:
            raise IndexError(
                f"index ({l1}, {m1}, {l2}, {m2}) outside table of order {self.max_order}"
            )

    def entry(self, l1, m1, l2, m2):
        self._check_index(l1, m1, l2, m2)
        return complex(self.data[l1, m1, l2, m2])

    def set_entry(self, l1, m1, l2, m2, value):
        self._check_index(l1, m1, l2, m2)
        self.data[l1, m1, l2, m2] = value

    def error(self, l1, m1, l2, m2):
        self._check_index(l1, m1, l2, m2)
        if self.errors is None:
            return None
        return float(self.errors[l1, m1, l2, m2])

    def indices(self):
        K = self.max_order
        for t in range(K + 1):
            for l1 in range(t + 1):
                for m1 in range(t - l1 + 1):
                    for l2 in range(t - l1 - m1 + 1):
                        m2 = t - l1 - m1 - l2
                        yield (l1, m1, l2, m2)

    def items(self):
        for idx in self.indices():
            yield idx, complex(self.data[idx])

    def conjugation_residual(self):
        """Largest deviation from entry(l1,m1,l2,m2) == conj(entry(m1,l1,m2,l2))."""
        residual = 0.0
        for (l1, m1, l2, m2), value in self.items():
            residual = max(residual, abs(value - np.conj(self.data[m1, l1, m2, l2])))
        return residual

    def channel_table(self, channel):
        """Marginal single-channel table (other channel's indices at zero)."""
        if channel not in (0, 1):
            raise ValueError("channel must be 0 or 1")
        out = MomentTable(self.max_order)
        for t in range(self.max_order + 1):
            for l, m in pairs_of_order(t):
                if channel == 0:
                    out.data[l, m] = self.data[l, m, 0, 0]
                    if self.errors is not None:
                        if out.errors is None:
                            out.errors = np.zeros_like(out.data, dtype=np.float64)
                        out.errors[l, m] = self.errors[l, m, 0, 0]
                else:
                    out.data[l, m] = self.data[0, 0, l, m]
                    if self.errors is not None:
                        if out.errors is None:
                            out.errors = np.zeros_like(out.data, dtype=np.float64)
                        out.errors[l, m] = self.errors[0, 0, l, m]
        return out

    def copy(self):
        errors = None if self.errors is None else self.errors.copy()
        return type(self)(self.max_order, self.data, errors, self.n_shots)

    def to_dict(self):
        out = {
            "max_order": self.max_order,
            "entries": {
                _key(idx): [value.real, value.imag] for idx, value in self.items()
            },
        }
        if self.errors is not None:
            out["errors"] = {
                _key(idx): float(self.errors[idx]) for idx, _ in self.items()
            }
        if self.n_shots is not None:
            out["n_shots"] = int(self.n_shots)
        return out

    @classmethod
    def from_dict(cls, payload):
        table = cls(int(payload["max_order"]), n_shots=payload.get("n_shots"))
        for key, (re, im) in payload["entries"].items():
            idx = _unkey(key, 4)
            table.set_entry(*idx, complex(re, im))
        if "errors" in payload:
            table.errors = np.zeros(table.data.shape, dtype=np.float64)
            for key, err in payload["errors"].items():
                table.errors[_unkey(key, 4)] = err
        return table

    def __repr__(self):
        return f"{type(self).__name__}(max_order={self.max_order}, n_shots={self.n_shots})"


class NoiseJointTable(JointMomentTable):
    """Joint amplification-noise table, antinormally indexed per channel.

    Entry (k1, j1, k2, j2) is ``<V1^k1 V1dag^j1 V2^k2 V2dag^j2>``.  For
    independent chains it factorizes into the two single-channel tables; the
    reference-state reconstruction does not rely on that and uses the joint
    entries directly.
    """

    def factorization_residual(self):
        """Largest |entry - entry(ch1) * entry(ch2)| over the table."""
        residual = 0.0
        for (k1, j1, k2, j2), value in self.items():
            split = self.data[k1, j1, 0, 0] * self.data[0, 0, k2, j2]
            residual = max(residual, abs(value - split))
        return residual


def _converted(table, target_ordering, signs):
    _check_max_order(table.max_order)
    out = MomentTable(table.max_order, target_ordering)
    for (l, m), _ in table.items():
        acc = 0.0 + 0.0j
        for k in range(min(l, m) + 1):
            coeff = signs**k * math.factorial(k) * math.comb(l, k) * math.comb(m, k)
            acc += coeff * table.data[m - k, l - k]
        out.data[l, m] = acc
    if table.errors is not None:
        # Propagating correlated entry errors through the reordering sum is
        # not well defined from marginal errors alone; drop them.
        out.errors = None
    return out


def normal_to_antinormal(table):
    """Convert ``<Vdag^l V^m>`` entries to ``<V^r Vdag^s>`` entries."""
    if table.ordering != "normal":
        raise ValueError("input table must be normally ordered")
    return _converted(table, "antinormal", +1)


def antinormal_to_normal(table):
    """Convert ``<V^r Vdag^s>`` entries to ``<Vdag^l V^m>`` entries."""
    if table.ordering != "antinormal":
        raise ValueError("input table must be antinormally ordered")
    return _converted(table, "normal", -1)


def dump_json(obj, path):
    """Write a dict payload as deterministic JSON."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
