"""Plain-text certificates for m-ovoids, weighted ovoids and 1-systems.

Layout::

    q=2;poly=0,1;r=3;g=1,1,1
    claim=m-ovoid;m=3
    0,0,0,0,0,0,0,1
    ...

Weighted entries carry a ``;w=<int>`` suffix (unlisted points weigh 0).
One-system certificates list blocks of q+1 points separated by blank lines.
Loading re-normalizes every point and re-runs the claimed verification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constructions import OneSystem, is_one_system
from .gf import NotAPrimePower, field_make
from .ovoid import PointSet, WeightedOvoid, is_m_ovoid, is_weighted_ovoid, ovoid_size
from .projgeom import ResourceLimit
from .quadric import DEFAULT_MAX_GENERATORS, DEFAULT_MAX_POINTS, Quadric, bits, quadric_make

CLAIMS = ("m-ovoid", "weighted", "one-system")


class ParseError(ValueError):
    pass


class VerificationFailed(Exception):
    pass


@dataclass
class Certificate:
    quadric: Quadric
    claim: str
    m: int | None = None
    points: PointSet | None = None
    weights: np.ndarray | None = None
    lines: list[int] = field(default_factory=list)


def _fmt_point(Q: Quadric, i: int) -> str:
    return ",".join(map(str, Q.point(i)))


def make_certificate(obj, claim: str | None = None, m: int | None = None) -> str:
    """Serialize a PointSet, WeightedOvoid or OneSystem."""
    if isinstance(obj, PointSet):
        Q = obj.quadric
        claim = claim or "m-ovoid"
        if m is None:
            m = is_m_ovoid(Q, obj)
            if m is None:
                raise ValueError("point set is not an m-ovoid; pass m explicitly")
        body = [_fmt_point(Q, i) for i in obj.ids()]
        head = f"claim={claim};m={m}"
    elif isinstance(obj, WeightedOvoid):
        Q = obj.quadric
        head = f"claim=weighted;m={obj.m if m is None else m}"
        body = [f"{_fmt_point(Q, i)};w={w}" for i, w in enumerate(obj.weights) if w]
    elif isinstance(obj, OneSystem):
        Q = obj.quadric
        head = "claim=one-system"
        body = []
        for n, line in enumerate(sorted(obj.lines, key=lambda l: bits(l))):
            if n:
                body.append("")
            body += [_fmt_point(Q, i) for i in bits(line)]
    else:
        raise TypeError(f"cannot certify {type(obj).__name__}")
    return "\n".join([Q.descriptor(), head] + body) + "\n"


def write_certificate(path, obj, claim: str | None = None, m: int | None = None) -> Path:
    path = Path(path)
    path.write_text(make_certificate(obj, claim, m))
    return path


def _kv(line: str) -> dict[str, str]:
    out = {}
    for part in line.strip().split(";"):
        if "=" not in part:
            raise ParseError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _ints(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in s.split(","))
    except ValueError as exc:
        raise ParseError(f"bad integer list {s!r}") from exc


def parse_certificate(text: str, max_points: int = DEFAULT_MAX_POINTS):
    """Parse without verifying; returns (quadric, header dict, body lines)."""
    lines = text.splitlines()
    if len(lines) < 2:
        raise ParseError("certificate needs two header lines")
    head = _kv(lines[0])
    for key in ("q", "poly", "r", "g"):
        if key not in head:
            raise ParseError(f"header is missing {key}")
    try:
        q, r = int(head["q"]), int(head["r"])
        F = field_make(q)
    except (ValueError, NotAPrimePower) as exc:
        raise ParseError(str(exc)) from exc
    if _ints(head["poly"]) != F.modulus:
        raise ParseError(f"unsupported field polynomial {head['poly']}")
    if r < 1:
        raise ParseError("rank must be positive")
    try:
        Q = quadric_make(F, r, max_points)
    except ResourceLimit:
        raise
    if _ints(head["g"]) != Q.g:
        raise ParseError(f"unsupported form tail g={head['g']}")
    claim = _kv(lines[1])
    if claim.get("claim") not in CLAIMS:
        raise ParseError(f"unknown claim {claim.get('claim')!r}")
    if claim["claim"] != "one-system":
        if "m" not in claim:
            raise ParseError("claim needs m")
        try:
            int(claim["m"])
        except ValueError as exc:
            raise ParseError("m must be an integer") from exc
    return Q, claim, lines[2:]


def _point_index(Q: Quadric, coords: tuple[int, ...]) -> int:
    if len(coords) != Q.n + 1:
        raise ParseError(f"point {coords} has {len(coords)} coordinates, expected {Q.n + 1}")
    if any(not 0 <= c < Q.q for c in coords):
        raise ParseError(f"coordinate out of range in {coords}")
    if not any(coords):
        raise ParseError("zero vector")
    if Q.value(coords) != 0:
        raise VerificationFailed(f"point {coords} is not on the quadric")
    return Q.index_of(coords)


def verify_text(text: str, max_points: int = DEFAULT_MAX_POINTS,
                max_generators: int = DEFAULT_MAX_GENERATORS) -> Certificate:
    Q, claim, body = parse_certificate(text, max_points)
    kind = claim["claim"]
    if kind == "one-system":
        blocks, cur = [], []
        for ln in body:
            if ln.strip():
                cur.append(ln)
            elif cur:
                blocks.append(cur)
                cur = []
        if cur:
            blocks.append(cur)
        seen: set[int] = set()
        masks = []
        for block in blocks:
            idx = [_point_index(Q, _ints(ln)) for ln in block]
            if seen & set(idx) or len(set(idx)) != len(idx):
                raise VerificationFailed("duplicate point")
            seen |= set(idx)
            mask = sum(1 << i for i in idx)
            if len(idx) != Q.q + 1 or mask not in set(Q.line_masks()):
                raise VerificationFailed(f"block {len(masks) + 1} is not a totally singular line")
            masks.append(mask)
        if Q.r != 3:
            raise VerificationFailed("1-systems need a rank-3 quadric")
        if len(masks) != Q.q ** 4 + 1:
            raise VerificationFailed(f"{len(masks)} lines, a 1-system has {Q.q ** 4 + 1}")
        if not is_one_system(Q, masks):
            raise VerificationFailed("plane condition violated")
        return Certificate(Q, kind, lines=masks)

    m = int(claim["m"])
    seen = set()
    weights = np.zeros(Q.k, dtype=np.int64)
    for ln in body:
        if not ln.strip():
            continue
        if kind == "weighted":
            if ";w=" not in ln:
                raise ParseError(f"weighted entry without w: {ln!r}")
            pt, w = ln.split(";w=", 1)
            try:
                wv = int(w)
            except ValueError as exc:
                raise ParseError(f"bad weight {w!r}") from exc
        else:
            pt, wv = ln, 1
        i = _point_index(Q, _ints(pt))
        if i in seen:
            raise VerificationFailed(f"duplicate point {pt}")
        seen.add(i)
        weights[i] = wv

    if kind == "m-ovoid":
        S = PointSet.from_ids(Q, seen)
        if S.size != ovoid_size(Q, m):
            raise VerificationFailed(
                f"size law: {S.size} points, m={m} needs {ovoid_size(Q, m)}")
        got = is_m_ovoid(Q, S, max_generators)
        if got != m:
            raise VerificationFailed(f"generator intersections are not all {m}")
        return Certificate(Q, kind, m, points=S)

    got = is_weighted_ovoid(Q, weights)
    if got != m:
        raise VerificationFailed(f"weighted ovoid condition fails for m={m}")
    if m < 0:
        warnings.warn(f"certificate claims negative m = {m}", stacklevel=2)
    return Certificate(Q, kind, m, weights=weights)


def load_certificate(path, max_points: int = DEFAULT_MAX_POINTS,
                     max_generators: int = DEFAULT_MAX_GENERATORS) -> Certificate:
    return verify_text(Path(path).read_text(), max_points, max_generators)
