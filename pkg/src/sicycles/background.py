"""Maximum-entropy background model over edge weights.

Every cell ``(i, j)`` of the weighted adjacency matrix gets an independent
geometric/exponential law with rate ``Lam[i, j] = lambda_out[i] +
lambda_in[j] + sum of the multipliers of the blocks containing (i, j)``.
The multipliers minimise the convex dual

    sum_{cells} -log(1 - exp(-Lam)) + <lambda, targets>

whose gradient is the vector of constraint residuals (target minus expected
sum). We minimise it with damped Newton steps and a halving line search.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import DiGraph

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
# reported multiplier for constraints that force a row/column/block to zero
PINNED = math.inf


class NonConvergence(RuntimeError):
    def __init__(self, iters: int, residual: float):
        self.iters = iters
        self.residual = residual
        super().__init__(f"no convergence after {iters} iterations (max relative residual {residual:.3g})")


class InfeasiblePrior(ValueError):
    pass


class DomainError(KeyError):
    pass


@dataclass(frozen=True)
class Block:
    """Constraint on the summed weight of a set of adjacency cells."""

    cells: tuple[tuple[int, int], ...]
    target: float

    def __post_init__(self):
        if self.target < 0:
            raise ValueError("block target must be non-negative")
        object.__setattr__(self, "cells", tuple(sorted({(int(i), int(j)) for i, j in self.cells})))

    @classmethod
    def product(cls, rows: Iterable[int], cols: Iterable[int], target: float) -> "Block":
        return cls(tuple((i, j) for i in rows for j in cols), float(target))

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros((n, n), dtype=bool)
        if self.cells:
            idx = np.asarray(self.cells)
            if idx.min() < 0 or idx.max() >= n:
                raise ValueError("block cell outside the node range")
            m[idx[:, 0], idx[:, 1]] = True
        return m


@dataclass(frozen=True)
class PriorSpec:
    degree_prior: bool = True
    blocks: tuple[Block, ...] = ()

    @property
    def uniform(self) -> bool:
        return not self.degree_prior and not self.blocks

    @classmethod
    def from_dict(cls, data: dict, graph: DiGraph | None = None) -> "PriorSpec":
        blocks = []
        for spec in data.get("blocks", []):
            if "cells" in spec:
                cells = [tuple(c) for c in spec["cells"]]
            else:
                cells = [(i, j) for i in spec["rows"] for j in spec["cols"]]
            target = spec.get("target")
            if target is None:
                if graph is None:
                    raise ValueError("block without target needs the graph to infer it")
                target = sum(graph.w(i, j) for i, j in cells if graph.has_edge(i, j))
            blocks.append(Block(tuple(cells), float(target)))
        return cls(bool(data.get("degree_prior", True)), tuple(blocks))

    def to_dict(self) -> dict:
        return {
            "degree_prior": self.degree_prior,
            "blocks": [{"cells": [list(c) for c in b.cells], "target": b.target} for b in self.blocks],
        }

    @classmethod
    def load(cls, path: str | Path, graph: DiGraph | None = None) -> "PriorSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), graph)


@dataclass
class MaxEntModel:
    n: int
    lambda_out: np.ndarray
    lambda_in: np.ndarray
    lambda_block: np.ndarray
    blocks: tuple[Block, ...]
    domain: np.ndarray  # bool (n, n); False cells have zero expectation
    degree_prior: bool = True
    history: list[float] = field(default_factory=list, repr=False)

    def rates(self) -> np.ndarray:
        """``Lam`` matrix; ``inf`` outside the domain."""
        lam = self.lambda_out[:, None] + self.lambda_in[None, :]
        for b, lb in zip(self.blocks, self.lambda_block):
            if math.isfinite(lb):
                lam = lam + lb * b.mask(self.n)
        lam = np.where(self.domain, lam, np.inf)
        return lam

    def rate(self, i: int, j: int) -> float:
        if not self.domain[i, j]:
            raise DomainError((i, j))
        lam = self.lambda_out[i] + self.lambda_in[j]
        for b, lb in zip(self.blocks, self.lambda_block):
            if (i, j) in b.cells:
                lam += lb
        return float(lam)

    def expected(self) -> np.ndarray:
        lam = self.rates()
        with np.errstate(over="ignore", divide="ignore"):
            return np.where(self.domain, 1.0 / np.expm1(lam), 0.0)

    def to_dict(self) -> dict:
        def fin(a):
            return [float(x) if math.isfinite(x) else None for x in a]

        return {
            "n": self.n,
            "degree_prior": self.degree_prior,
            "lambda_out": fin(self.lambda_out),
            "lambda_in": fin(self.lambda_in),
            "blocks": [
                {"cells": [list(c) for c in b.cells], "target": b.target, "lambda": fin([lb])[0]}
                for b, lb in zip(self.blocks, self.lambda_block)
            ],
            "excluded": [list(map(int, c)) for c in np.argwhere(~self.domain)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MaxEntModel":
        def unfin(a):
            return np.array([PINNED if x is None else float(x) for x in a], dtype=float)

        n = int(data["n"])
        blocks = tuple(Block(tuple(tuple(c) for c in b["cells"]), b["target"]) for b in data["blocks"])
        domain = np.ones((n, n), dtype=bool)
        for i, j in data.get("excluded", []):
            domain[i, j] = False
        return cls(
            n=n,
            lambda_out=unfin(data["lambda_out"]),
            lambda_in=unfin(data["lambda_in"]),
            lambda_block=unfin([b["lambda"] for b in data["blocks"]]),
            blocks=blocks,
            domain=domain,
            degree_prior=bool(data.get("degree_prior", True)),
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path: str | Path) -> "MaxEntModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class MaxEntDual:
    """The dual objective over the free multipliers.

    Parameter vector layout: free ``lambda_out`` rows, free ``lambda_in``
    columns, then free block multipliers. Rows/columns with zero target and
    zero-target blocks are not free: their cells leave the domain.
    """

    def __init__(self, n: int, row_targets, col_targets, blocks: Sequence[Block],
                 degree_prior: bool = True):
        self.n = n
        self.degree_prior = degree_prior
        self.blocks = tuple(blocks)
        row_targets = np.asarray(row_targets, dtype=float)
        col_targets = np.asarray(col_targets, dtype=float)
        self.domain = np.ones((n, n), dtype=bool)
        masks = [b.mask(n) for b in self.blocks]
        if degree_prior:
            self.domain[row_targets <= 0, :] = False
            self.domain[:, col_targets <= 0] = False
        for b, m in zip(self.blocks, masks):
            if b.target <= 0:
                self.domain &= ~m
        self.free_rows = np.flatnonzero(row_targets > 0) if degree_prior else np.zeros(0, int)
        self.free_cols = np.flatnonzero(col_targets > 0) if degree_prior else np.zeros(0, int)
        self.free_blocks = [k for k, b in enumerate(self.blocks) if b.target > 0 and (masks[k] & self.domain).any()]
        self.row_targets = row_targets
        self.col_targets = col_targets
        self.block_masks = [masks[k] & self.domain for k in self.free_blocks]
        self.block_targets = np.array([self.blocks[k].target for k in self.free_blocks], dtype=float)
        self.nr, self.nc, self.nb = len(self.free_rows), len(self.free_cols), len(self.free_blocks)
        self.size = self.nr + self.nc + self.nb
        self.targets = np.concatenate(
            [row_targets[self.free_rows], col_targets[self.free_cols], self.block_targets]
        )

    def unpack(self, theta):
        lo = np.zeros(self.n)
        li = np.zeros(self.n)
        lo[self.free_rows] = theta[: self.nr]
        li[self.free_cols] = theta[self.nr : self.nr + self.nc]
        lb = theta[self.nr + self.nc :]
        return lo, li, lb

    def rates(self, theta) -> np.ndarray:
        lo, li, lb = self.unpack(theta)
        lam = lo[:, None] + li[None, :]
        for m, x in zip(self.block_masks, lb):
            lam = lam + x * m
        return lam

    def feasible(self, theta) -> bool:
        lam = self.rates(theta)
        return bool(np.all(lam[self.domain] > 0))

    def value(self, theta) -> float:
        lam = self.rates(theta)[self.domain]
        if np.any(lam <= 0):
            return math.inf
        return float(-np.sum(np.log(-np.expm1(-lam))) + theta @ self.targets)

    def _sums(self, mat) -> np.ndarray:
        parts = [mat.sum(axis=1)[self.free_rows], mat.sum(axis=0)[self.free_cols]]
        parts.append(np.array([mat[m].sum() for m in self.block_masks]))
        return np.concatenate(parts)

    def expected(self, theta) -> np.ndarray:
        lam = self.rates(theta)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return np.where(self.domain, 1.0 / np.expm1(np.where(self.domain, lam, 1.0)), 0.0)

    def grad(self, theta) -> np.ndarray:
        return self.targets - self._sums(self.expected(theta))

    def hess(self, theta) -> np.ndarray:
        E = self.expected(theta)
        V = E * (1.0 + E)
        H = np.zeros((self.size, self.size))
        r, c, b = self.nr, self.nc, self.nb
        rows, cols = self.free_rows, self.free_cols
        H[:r, :r] = np.diag(V.sum(axis=1)[rows])
        H[r : r + c, r : r + c] = np.diag(V.sum(axis=0)[cols])
        H[:r, r : r + c] = V[np.ix_(rows, cols)]
        H[r : r + c, :r] = H[:r, r : r + c].T
        for k, m in enumerate(self.block_masks):
            Vm = V * m
            H[:r, r + c + k] = Vm.sum(axis=1)[rows]
            H[r : r + c, r + c + k] = Vm.sum(axis=0)[cols]
            for k2, m2 in enumerate(self.block_masks):
                H[r + c + k, r + c + k2] = (Vm * m2).sum()
        H[r + c :, : r + c] = H[: r + c, r + c :].T
        return H

    def relative_residual(self, theta) -> float:
        if self.size == 0:
            return 0.0
        res = np.abs(self.grad(theta)) / np.maximum(1.0, self.targets)
        return float(res.max())

    def initial(self) -> np.ndarray:
        cells = int(self.domain.sum())
        total = float(self.row_targets[self.free_rows].sum()) if self.degree_prior else 0.0
        if not self.degree_prior:
            total = float(self.block_targets.sum())
        theta = np.zeros(self.size)
        if cells == 0 or total <= 0:
            return theta
        # solve cells * e^{-2c} / (1 - e^{-2c}) = total
        c = 0.5 * math.log((cells + total) / total)
        theta[: self.nr + self.nc] = c
        if not self.degree_prior:
            theta[self.nr + self.nc :] = 2 * c
        return theta


def _degree_targets(graph: DiGraph):
    return graph.out_strength(), graph.in_strength()


def fit_maxent(
    graph: DiGraph,
    prior: PriorSpec,
    tol: float = 1e-6,
    max_iters: int = 10_000,
) -> MaxEntModel:
    """Fit the multipliers so every active constraint holds to ``tol``.

    ``tol`` is relative: ``|target - expected| / max(1, target)``. Without a
    degree prior an implicit block over all cells pins the total weight, so
    unconstrained cells still get a proper distribution.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = graph.n
    rows, cols = _degree_targets(graph)
    blocks = tuple(prior.blocks)
    extra = 0
    if not prior.degree_prior:
        blocks = (Block(tuple((i, j) for i in range(n) for j in range(n)), float(graph.weight.sum())),) + blocks
        extra = 1
    dual = MaxEntDual(n, rows, cols, blocks, degree_prior=prior.degree_prior)
    theta = dual.initial()
    history = [dual.value(theta)] if dual.size else []
    converged = dual.size == 0
    it = 0
    while not converged and it < max_iters:
        it += 1
        g = dual.grad(theta)
        if dual.relative_residual(theta) <= tol:
            converged = True
            break
        f0 = history[-1]
        H = dual.hess(theta)
        ridge = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(H)))))
        direction = np.linalg.lstsq(H + ridge * np.eye(dual.size), -g, rcond=None)[0]
        if not (g @ direction < 0):
            direction = -g
        accepted = False
        for attempt in range(2):
            t = 1.0
            slope = float(g @ direction)
            while t > 1e-14:
                cand = theta + t * direction
                f1 = dual.value(cand)
                if f1 <= f0 + 1e-4 * t * slope:
                    accepted = True
                    break
                t *= 0.5
            if accepted or attempt == 1:
                break
            direction = -g
        if not accepted:
            raise InfeasiblePrior(
                f"dual cannot be decreased further (relative residual {dual.relative_residual(theta):.3g})"
            )
        theta = cand
        history.append(f1)
        if not np.all(np.isfinite(theta)) or np.max(np.abs(theta)) > 1e8 or f1 < -1e15:
            raise InfeasiblePrior("multipliers diverge; the prior constraints are inconsistent")
    if not converged:
        if dual.relative_residual(theta) <= tol:
            converged = True
        else:
            raise NonConvergence(max_iters, dual.relative_residual(theta))
    log.debug("maxent fit converged after %d iterations", it)

    lo, li, lb_free = dual.unpack(theta)
    if prior.degree_prior:
        lo[rows <= 0] = PINNED
        li[cols <= 0] = PINNED
    lam_block = np.full(len(blocks), PINNED)
    for k, x in zip(dual.free_blocks, lb_free):
        lam_block[k] = x
    for k, b in enumerate(blocks):
        if b.target > 0 and k not in dual.free_blocks:
            lam_block[k] = 0.0
    if extra:
        # fold the implicit total-weight block into the row multipliers
        lo = lo + lam_block[0]
        lam_block = lam_block[1:]
        blocks = blocks[1:]
    return MaxEntModel(
        n=n,
        lambda_out=lo,
        lambda_in=li,
        lambda_block=lam_block,
        blocks=blocks,
        domain=dual.domain,
        degree_prior=prior.degree_prior,
        history=history,
    )


def edge_survival(model: MaxEntModel, i: int, j: int, ell: float) -> float:
    """``Pr(weight(i, j) >= ell)`` under the model."""
    if ell < 0:
        raise ValueError("ell must be non-negative")
    return math.exp(-ell * model.rate(i, j))


def surprisal_graph(graph: DiGraph, model: MaxEntModel | None) -> DiGraph:
    """Reweight each edge by its information content in bits.

    ``model=None`` is the no-prior mode where every edge costs one bit.
    Zero-weight edges carry no information even outside the model domain.
    """
    if model is None:
        return graph.with_weights(np.ones(graph.m))
    if model.n != graph.n:
        raise ValueError("model and graph disagree on the node count")
    lam = model.rates()
    out = np.empty(graph.m)
    for e, (u, v, mu) in enumerate(graph.edges()):
        if mu == 0.0:
            out[e] = 0.0
            continue
        if not model.domain[u, v]:
            raise DomainError(f"edge ({u}, {v}) with weight {mu} lies outside the model domain")
        out[e] = mu * lam[u, v] / LN2
    return graph.with_weights(out)
