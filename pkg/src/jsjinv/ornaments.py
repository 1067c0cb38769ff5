"""Extended naturals, positive rationals and the interned ornament universe."""

from __future__ import annotations

import functools
import threading
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .errors import SchemaError


@functools.total_ordering
class ExtNat:
    """An element of N with a saturating top element INF."""

    __slots__ = ("_value",)

    def __init__(self, value: int | None):
        # None encodes INF; use the module level INF instead of calling this
        if value is not None:
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValueError(f"ExtNat needs a nonnegative int, got {value!r}")
        self._value = value

    @classmethod
    def parse(cls, raw: Any) -> "ExtNat":
        if raw == "inf":
            return INF
        if isinstance(raw, bool) or not isinstance(raw, int) or raw < 0:
            raise SchemaError(f"expected a nonnegative integer or 'inf', got {raw!r}")
        return cls(raw)

    @property
    def is_inf(self) -> bool:
        return self._value is None

    @property
    def value(self) -> int:
        if self._value is None:
            raise ValueError("INF has no finite value")
        return self._value

    def key(self) -> tuple[int, int]:
        return (1, 0) if self._value is None else (0, self._value)

    def __add__(self, other: "ExtNat") -> "ExtNat":
        if not isinstance(other, ExtNat):
            return NotImplemented
        if self._value is None or other._value is None:
            return INF
        return ExtNat(self._value + other._value)

    def __mul__(self, n: int) -> "ExtNat":
        # scaling by a finite multiplicity; 0 * INF is taken to be 0
        if n == 0:
            return ZERO
        return INF if self._value is None else ExtNat(self._value * n)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExtNat):
            return self._value == other._value
        if isinstance(other, int) and not isinstance(other, bool):
            return self._value == other
        return NotImplemented

    def __lt__(self, other: "ExtNat") -> bool:
        if isinstance(other, int):
            other = ExtNat(other)
        return self.key() < other.key()

    def __hash__(self) -> int:
        # consistent with equality against plain ints
        return hash("inf") if self._value is None else hash(self._value)

    def __bool__(self) -> bool:
        return self._value != 0

    def __str__(self) -> str:
        return "inf" if self._value is None else str(self._value)

    def __repr__(self) -> str:
        return "INF" if self._value is None else f"ExtNat({self._value})"

    def to_json(self) -> int | str:
        return "inf" if self._value is None else self._value


INF = ExtNat(None)
ZERO = ExtNat(0)
ONE = ExtNat(1)


def extnat_add(a: ExtNat, b: ExtNat) -> ExtNat:
    return a + b


def extnat_sum(values: Iterable[ExtNat]) -> ExtNat:
    total = ZERO
    for v in values:
        total = total + v
    return total


# Positive rationals are plain Fractions; these helpers pin the text format.

def parse_pos_rational(raw: Any, field: str = "value") -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, str):
        raise SchemaError(f"{field}: expected a string 'p/q', got {raw!r}")
    try:
        q = Fraction(raw.strip())
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"{field}: not a rational: {raw!r}") from None
    if q <= 0:
        raise SchemaError(f"{field}: must be positive, got {raw!r}")
    return q


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Ornaments

BASE, NEIGHBOR, SIGNED, ORBIT = 0, 1, 2, 3
_KIND_NAMES = {BASE: "base", NEIGHBOR: "neighbor", SIGNED: "signed", ORBIT: "orbit"}


class Ornament:
    """An interned decoration value.

    Never construct directly; use the ``base``/``neighbor``/``signed``/``orbit``
    constructors of an :class:`OrnamentUniverse`.  Equality is identity and
    the order is given by ``key``, a nested tuple built from child keys so
    that it does not depend on intern ids.
    """

    __slots__ = ("kind", "base", "payload", "key", "uid", "_root")

    def __init__(self, kind: int, base: "Ornament | None", payload: Any, key: tuple, uid: int):
        self.kind = kind
        self.base = base
        self.payload = payload
        self.key = key
        self.uid = uid
        self._root = self if base is None else base.root

    @property
    def root(self) -> "Ornament":
        """The Base ornament this value was refined from."""
        return self._root

    @property
    def kind_name(self) -> str:
        return _KIND_NAMES[self.kind]

    def __lt__(self, other: "Ornament") -> bool:
        return self.key < other.key

    def __le__(self, other: "Ornament") -> bool:
        return self.key <= other.key

    def __gt__(self, other: "Ornament") -> bool:
        return self.key > other.key

    def __ge__(self, other: "Ornament") -> bool:
        return self.key >= other.key

    def __repr__(self) -> str:
        if self.kind == BASE:
            return f"Base{self.payload!r}"
        return f"<{self.kind_name} #{self.uid} of {self.root!r}>"

    def label(self) -> str:
        """Short text of the root tag, e.g. ``rigid:F2``."""
        return ":".join(str(t) for t in self.root.payload)


def _atom_key(atom: Any) -> tuple:
    if isinstance(atom, Ornament):
        return (3, atom.key)
    if isinstance(atom, ExtNat):
        return (2, atom.key())
    if isinstance(atom, bool):
        return (1, int(atom))
    if isinstance(atom, int):
        return (1, atom)
    if isinstance(atom, str):
        return (0, atom)
    if isinstance(atom, tuple):
        return (4, tuple(_atom_key(a) for a in atom))
    raise TypeError(f"unsupported token atom {atom!r}")


def _atom_ident(atom: Any) -> Any:
    # hashable identity form used for the intern table
    if isinstance(atom, Ornament):
        return ("o", atom.uid)
    if isinstance(atom, ExtNat):
        return ("n", atom.key())
    if isinstance(atom, tuple):
        return tuple(_atom_ident(a) for a in atom)
    if isinstance(atom, bool):
        return ("int", int(atom))
    return (type(atom).__name__, atom)


class OrnamentUniverse:
    def __init__(self) -> None:
        self._table: dict[Any, Ornament] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._table)

    def _intern(self, ident: Any, kind: int, base: Ornament | None, payload: Any, key_fn) -> Ornament:
        found = self._table.get(ident)
        if found is not None:
            return found
        with self._lock:
            found = self._table.get(ident)
            if found is None:
                found = Ornament(kind, base, payload, key_fn(), len(self._table))
                self._table[ident] = found
            return found

    def base(self, *tag: Any) -> Ornament:
        tag = tuple(str(t) for t in tag)
        return self._intern((BASE, tag), BASE, None, tag, lambda: (BASE, tag))

    def neighbor(self, base: Ornament, counts: Mapping[Ornament, ExtNat] | Iterable[tuple[Ornament, ExtNat]]) -> Ornament:
        items = counts.items() if isinstance(counts, Mapping) else counts
        merged: dict[Ornament, ExtNat] = {}
        for orn, n in items:
            if not isinstance(n, ExtNat):
                n = ExtNat(n)
            merged[orn] = merged.get(orn, ZERO) + n
        pairs = tuple(sorted(((o, n) for o, n in merged.items() if n != ZERO), key=lambda p: p[0].key))
        ident = (NEIGHBOR, base.uid, tuple((o.uid, n.key()) for o, n in pairs))
        return self._intern(
            ident, NEIGHBOR, base, pairs,
            lambda: (NEIGHBOR, base.key, tuple((o.key, n.key()) for o, n in pairs)),
        )

    def signed(self, base: Ornament, sign: int) -> Ornament:
        if sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {sign!r}")
        return self._intern((SIGNED, base.uid, sign), SIGNED, base, sign, lambda: (SIGNED, base.key, sign))

    def orbit(self, base: Ornament, token: Any) -> Ornament:
        return self._intern(
            (ORBIT, base.uid, _atom_ident(token)), ORBIT, base, token,
            lambda: (ORBIT, base.key, _atom_key(token)),
        )


DEFAULT_UNIVERSE = OrnamentUniverse()


def intern(u: OrnamentUniverse, kind: str, *args: Any) -> Ornament:
    """Functional front end: ``intern(u, "base", "rigid")`` and friends."""
    return getattr(u, kind)(*args)


def ornament_cmp(a: Ornament, b: Ornament) -> int:
    if a is b:
        return 0
    return -1 if a.key < b.key else 1


def sort_ornaments(items: Iterable[Ornament]) -> list[Ornament]:
    return sorted(set(items), key=lambda o: o.key)


def ornament_table(roots: Iterable[Ornament]) -> tuple[dict[Ornament, str], dict[str, dict]]:
    """Serialize ornaments as a shared table to keep nested values small.

    Every ornament reachable from ``roots`` gets a name ``o<rank>`` where
    rank is its position in the canonical order, so the output does not
    depend on intern ids.
    """
    seen: set[Ornament] = set()
    stack = list(roots)
    while stack:
        o = stack.pop()
        if o in seen:
            continue
        seen.add(o)
        if o.base is not None:
            stack.append(o.base)
        if o.kind == NEIGHBOR:
            stack.extend(c for c, _ in o.payload)
        elif o.kind == ORBIT:
            stack.extend(_token_ornaments(o.payload))
    ordered = sort_ornaments(seen)
    names = {o: f"o{i}" for i, o in enumerate(ordered)}
    table: dict[str, dict] = {}
    for o in ordered:
        entry: dict[str, Any] = {"kind": o.kind_name}
        if o.kind == BASE:
            entry["tag"] = list(o.payload)
        else:
            entry["base"] = names[o.base]
            if o.kind == NEIGHBOR:
                entry["counts"] = [[names[c], n.to_json()] for c, n in o.payload]
            elif o.kind == SIGNED:
                entry["sign"] = o.payload
            else:
                entry["token"] = _token_json(o.payload, names)
        table[names[o]] = entry
    return names, table


def _token_ornaments(token: Any):
    if isinstance(token, Ornament):
        yield token
    elif isinstance(token, tuple):
        for t in token:
            yield from _token_ornaments(t)


def _token_json(token: Any, names: Mapping[Ornament, str]) -> Any:
    if isinstance(token, Ornament):
        return names[token]
    if isinstance(token, ExtNat):
        return token.to_json()
    if isinstance(token, tuple):
        return [_token_json(t, names) for t in token]
    return token
