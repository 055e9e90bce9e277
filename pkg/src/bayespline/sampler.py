"""Trans-dimensional sampler: birth/death/relocation moves plus conjugate
Gibbs updates for coefficients, noise variance and the atom-count mean.

One :class:`SamplerState` owns the evolving parameters together with
cached design columns and residuals; moves mutate it in place on
acceptance. Because atom structures are proposed from their own prior,
every structural density cancels in the acceptance ratios and only the
likelihood ratio, the Poisson dimension ratio and the move probabilities
survive. A from-scratch rebuild of the caches is kept as a cross-check
path for tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .atoms import BasisAtom, design_column
from .bspline import KnotSequence
from .errors import ProposalError
from .model import Dataset, Hyperparams, ModelState, fit_defaults
from .proposals import propose_atom, propose_structure

__all__ = [
    "MoveOutcome",
    "SamplerState",
    "Chain",
    "ChainDiagnostics",
    "birth_move",
    "death_move",
    "relocate_move",
    "gibbs_coefficients",
    "gibbs_noise_variance",
    "gibbs_mass",
    "run_chain",
    "save_chain",
    "load_chain",
]

_MOVE_KINDS = ("birth", "death", "relocate")


@dataclass(frozen=True)
class MoveOutcome:
    """Result of one structural move proposal."""

    move_kind: str
    accepted: bool
    log_accept_ratio: float
    proposed_n_atoms: int
    # Proposal details, kept for diagnostics and ratio cross-checks.
    proposed_atom: BasisAtom | None = None
    replaced_atom: BasisAtom | None = None
    atom_index: int | None = None


class SamplerState:
    """Model parameters plus the caches one chain mutates sequentially.

    Coefficients are authoritative in ``betas``; the ``atoms`` list holds
    structures only and is re-stamped with coefficients on ``snapshot``.
    ``flat_likelihood`` turns the likelihood term off (prior simulation)
    and ``fixed_sigma2`` pins the noise variance (probit uses 1.0).
    """

    def __init__(self, data: Dataset, hyper: Hyperparams,
                 response: np.ndarray | None = None,
                 intercept: float | None = None,
                 coef_scale: float | None = None,
                 flat_likelihood: bool = False,
                 fixed_sigma2: float | None = None):
        data = data.with_expansion(hyper.expansion)
        if intercept is None or coef_scale is None:
            beta0, scale = fit_defaults(data, hyper)
            intercept = beta0 if intercept is None else intercept
            coef_scale = scale if coef_scale is None else coef_scale
        self.data = data
        self.hyper = hyper
        self.intercept = float(intercept)
        self.coef_scale = float(coef_scale)
        self.flat_likelihood = bool(flat_likelihood)
        self.fixed_sigma2 = fixed_sigma2
        self.atoms: list[BasisAtom] = []
        self.betas = np.empty(0)
        if fixed_sigma2 is not None:
            self.sigma2 = float(fixed_sigma2)
        else:
            var = float(np.var(data.y, ddof=1)) if data.n_obs > 1 else 1.0
            self.sigma2 = var if var > 0 else 1.0
        self.levy_mass = hyper.mass_shape / hyper.mass_rate
        self.response = data.y if response is None else \
            np.asarray(response, dtype=np.float64)
        self.design = np.empty((data.n_obs, 0))
        self.resid = self.response - self.intercept

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def sse(self) -> float:
        return float(self.resid @ self.resid)

    def log_likelihood(self) -> float:
        if self.flat_likelihood:
            return 0.0
        n = self.data.n_obs
        return float(-0.5 * n * math.log(2.0 * math.pi * self.sigma2)
                     - 0.5 * self.sse() / self.sigma2)

    def _delta_loglik(self, new_resid: np.ndarray) -> float:
        if self.flat_likelihood:
            return 0.0
        new_sse = float(new_resid @ new_resid)
        return 0.5 * (self.sse() - new_sse) / self.sigma2

    def append_atom(self, atom: BasisAtom, beta: float, col: np.ndarray,
                    new_resid: np.ndarray) -> None:
        self.atoms.append(atom)
        self.betas = np.append(self.betas, beta)
        self.design = np.hstack([self.design, col[:, None]])
        self.resid = new_resid

    def remove_atom(self, idx: int, new_resid: np.ndarray) -> None:
        del self.atoms[idx]
        self.betas = np.delete(self.betas, idx)
        self.design = np.delete(self.design, idx, axis=1)
        self.resid = new_resid

    def replace_atom(self, idx: int, atom: BasisAtom, col: np.ndarray,
                     new_resid: np.ndarray) -> None:
        self.atoms[idx] = atom
        self.design = self.design.copy()
        self.design[:, idx] = col
        self.resid = new_resid

    def set_coefficients(self, betas: np.ndarray) -> None:
        self.betas = betas
        self.resid = self.response - self.intercept - self.design @ betas

    def set_response(self, response: np.ndarray) -> None:
        self.response = np.asarray(response, dtype=np.float64)
        self.resid = self.response - self.intercept - self.design @ self.betas

    def fitted(self) -> np.ndarray:
        return self.response - self.resid

    def rebuild_design(self) -> np.ndarray:
        """From-scratch design matrix (cross-check for the incremental cache)."""
        if not self.atoms:
            return np.empty((self.data.n_obs, 0))
        return np.column_stack([design_column(a, self.data.X)
                                for a in self.atoms])

    def snapshot(self) -> ModelState:
        atoms = tuple(a.with_coefficient(b)
                      for a, b in zip(self.atoms, self.betas))
        return ModelState(self.intercept, atoms, self.sigma2, self.levy_mass)


def _log_or_ninf(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def birth_move(state: SamplerState, data: Dataset, hyper: Hyperparams,
               rng: np.random.Generator) -> MoveOutcome:
    """Propose appending one atom drawn from its prior.

    With prior-as-proposal structure, the log acceptance ratio is the
    likelihood ratio plus ``log(levy_mass / (J + 1))`` plus the move
    probability ratio.
    """
    j = state.n_atoms
    try:
        atom = propose_atom(data, hyper, rng, state.coef_scale)
    except ProposalError:
        return MoveOutcome("birth", False, -math.inf, j + 1)
    col = design_column(atom, data.X)
    new_resid = state.resid - atom.coefficient * col
    p_b, p_d, _ = hyper.move_probs
    log_ratio = (state._delta_loglik(new_resid)
                 + math.log(state.levy_mass) - math.log(j + 1)
                 + _log_or_ninf(p_d) - _log_or_ninf(p_b))
    accepted = math.log(rng.random()) < log_ratio
    if accepted:
        state.append_atom(atom, atom.coefficient, col, new_resid)
    return MoveOutcome("birth", accepted, log_ratio, j + 1,
                       proposed_atom=atom)


def death_move(state: SamplerState, data: Dataset, hyper: Hyperparams,
               rng: np.random.Generator) -> MoveOutcome:
    """Propose removing one uniformly chosen atom (no-op rejection at J=0)."""
    j = state.n_atoms
    if j == 0:
        return MoveOutcome("death", False, -math.inf, 0)
    idx = int(rng.integers(j))
    beta = float(state.betas[idx])
    removed = state.atoms[idx].with_coefficient(beta)
    new_resid = state.resid + beta * state.design[:, idx]
    p_b, p_d, _ = hyper.move_probs
    log_ratio = (state._delta_loglik(new_resid)
                 + math.log(j) - math.log(state.levy_mass)
                 + _log_or_ninf(p_b) - _log_or_ninf(p_d))
    accepted = math.log(rng.random()) < log_ratio
    if accepted:
        state.remove_atom(idx, new_resid)
    return MoveOutcome("death", accepted, log_ratio, j - 1,
                       replaced_atom=removed, atom_index=idx)


def relocate_move(state: SamplerState, data: Dataset, hyper: Hyperparams,
                  rng: np.random.Generator) -> MoveOutcome:
    """Redraw the structural block of one atom, keeping its coefficient.

    Structure is proposed from its prior, so the ratio reduces to the
    likelihood ratio; the coefficient is refreshed by
    :func:`gibbs_coefficients` instead.
    """
    j = state.n_atoms
    if j == 0:
        return MoveOutcome("relocate", False, -math.inf, 0)
    idx = int(rng.integers(j))
    beta = float(state.betas[idx])
    old = state.atoms[idx].with_coefficient(beta)
    try:
        variables, degrees, knots = propose_structure(data, hyper, rng)
    except ProposalError:
        return MoveOutcome("relocate", False, -math.inf, j,
                           replaced_atom=old, atom_index=idx)
    atom = BasisAtom(variables, degrees, knots, beta)
    col = design_column(atom, data.X)
    new_resid = state.resid + beta * (state.design[:, idx] - col)
    log_ratio = state._delta_loglik(new_resid)
    accepted = math.log(rng.random()) < log_ratio
    if accepted:
        state.replace_atom(idx, atom, col, new_resid)
    return MoveOutcome("relocate", accepted, log_ratio, j,
                       proposed_atom=atom, replaced_atom=old, atom_index=idx)


def gibbs_coefficients(state: SamplerState, rng: np.random.Generator) -> None:
    """Joint draw of all coefficients from their Gaussian full conditional.

    The prior precision keeps the system positive definite even for
    rank-deficient designs. Under a flat likelihood the conditional is the
    prior itself.
    """
    j = state.n_atoms
    if j == 0:
        return
    if state.flat_likelihood:
        state.set_coefficients(rng.normal(0.0, state.coef_scale, size=j))
        return
    design = state.design
    prec = design.T @ design / state.sigma2
    prec[np.diag_indices(j)] += 1.0 / state.coef_scale ** 2
    rhs = design.T @ (state.response - state.intercept) / state.sigma2
    chol = cho_factor(prec, lower=True)
    mean = cho_solve(chol, rhs)
    noise = solve_triangular(chol[0], rng.standard_normal(j),
                             lower=True, trans="T")
    state.set_coefficients(mean + noise)


def gibbs_noise_variance(state: SamplerState, rng: np.random.Generator) -> None:
    """Inverse-Gamma full-conditional draw of the noise variance.

    Skipped when the variance is pinned (probit). Under a flat likelihood
    (or empty data) the draw falls back to the prior.
    """
    if state.fixed_sigma2 is not None:
        return
    hyper = state.hyper
    shape = 0.5 * hyper.noise_df
    scale = 0.5 * hyper.noise_df * hyper.noise_scale
    if not state.flat_likelihood:
        shape += 0.5 * state.data.n_obs
        scale += 0.5 * state.sse()
    # Tiny shapes (the near-improper default prior) can underflow the Gamma
    # draw to exactly 0; keep the inverse draw finite.
    g = max(rng.gamma(shape), 1e-300)
    state.sigma2 = min(scale / g, 1e300)


def gibbs_mass(state: SamplerState, rng: np.random.Generator) -> None:
    """Gamma full-conditional draw of the expected atom count."""
    hyper = state.hyper
    state.levy_mass = rng.gamma(hyper.mass_shape + state.n_atoms,
                                1.0 / (hyper.mass_rate + 1.0))


@dataclass
class ChainDiagnostics:
    proposed: dict[str, int]
    accepted: dict[str, int]
    n_atoms_trace: np.ndarray
    sigma2_trace: np.ndarray
    mass_trace: np.ndarray

    def acceptance_rate(self, kind: str) -> float:
        prop = self.proposed.get(kind, 0)
        return self.accepted.get(kind, 0) / prop if prop else 0.0


@dataclass
class Chain:
    """Retained post-burn-in, thinned states plus run diagnostics."""

    samples: list[ModelState]
    diagnostics: ChainDiagnostics | None = None
    link: str = "gaussian"
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)


def _select_move(u: float, probs: tuple[float, float, float]) -> str:
    if u < probs[0]:
        return "birth"
    if u < probs[0] + probs[1]:
        return "death"
    return "relocate"


_MOVE_FUNCS = {"birth": birth_move, "death": death_move,
               "relocate": relocate_move}


def run_iteration(state: SamplerState, rng: np.random.Generator) -> MoveOutcome:
    """One sweep: a structural move followed by the conjugate updates."""
    kind = _select_move(rng.random(), state.hyper.move_probs)
    outcome = _MOVE_FUNCS[kind](state, state.data, state.hyper, rng)
    gibbs_coefficients(state, rng)
    gibbs_noise_variance(state, rng)
    gibbs_mass(state, rng)
    return outcome


def run_chain(data: Dataset, hyper: Hyperparams,
              flat_likelihood: bool = False,
              fixed_sigma2: float | None = None) -> Chain:
    """Run one chain on ``data`` under ``hyper``; deterministic per seed.

    ``flat_likelihood`` disables the likelihood everywhere (the chain then
    samples the prior; used by validation suites). ``fixed_sigma2`` pins
    the noise variance and skips its update.
    """
    data = data.with_expansion(hyper.expansion)
    rng = np.random.default_rng(hyper.seed)
    state = SamplerState(data, hyper, flat_likelihood=flat_likelihood,
                         fixed_sigma2=fixed_sigma2)
    proposed = {k: 0 for k in _MOVE_KINDS}
    accepted = {k: 0 for k in _MOVE_KINDS}
    n_trace = np.empty(hyper.n_iter, dtype=np.int64)
    s2_trace = np.empty(hyper.n_iter)
    m_trace = np.empty(hyper.n_iter)
    samples: list[ModelState] = []
    for it in range(1, hyper.n_iter + 1):
        outcome = run_iteration(state, rng)
        proposed[outcome.move_kind] += 1
        accepted[outcome.move_kind] += outcome.accepted
        n_trace[it - 1] = state.n_atoms
        s2_trace[it - 1] = state.sigma2
        m_trace[it - 1] = state.levy_mass
        if it > hyper.burn_in and (it - hyper.burn_in) % hyper.thin == 0:
            samples.append(state.snapshot())
    diag = ChainDiagnostics(proposed, accepted, n_trace, s2_trace, m_trace)
    meta = {"seed": hyper.seed, "n_iter": hyper.n_iter,
            "burn_in": hyper.burn_in, "thin": hyper.thin,
            "n_features": data.n_features}
    return Chain(samples, diag, "gaussian", meta)


# ---------------------------------------------------------------------------
# JSON-lines persistence: a header line, then one retained state per line.

_SCHEMA = "bayespline-chain/1"


def _state_to_obj(state: ModelState) -> dict:
    return {
        "intercept": state.intercept,
        "sigma2": state.sigma2,
        "mass": state.levy_mass,
        "atoms": [
            {"variables": list(a.variables), "degrees": list(a.degrees),
             "knots": [list(ks.knots) for ks in a.knots],
             "coefficient": a.coefficient}
            for a in state.atoms
        ],
    }


def _state_from_obj(obj: dict) -> ModelState:
    atoms = tuple(
        BasisAtom(tuple(a["variables"]), tuple(a["degrees"]),
                  tuple(KnotSequence(c, tuple(k))
                        for c, k in zip(a["degrees"], a["knots"])),
                  a["coefficient"])
        for a in obj["atoms"]
    )
    return ModelState(obj["intercept"], atoms, obj["sigma2"], obj["mass"])


def save_chain(chain: Chain, path) -> None:
    """Write the chain as versioned JSON lines (states only, no traces)."""
    header = {"schema": _SCHEMA, "link": chain.link,
              "n_samples": len(chain.samples), "meta": chain.meta}
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for state in chain.samples:
            fh.write(json.dumps(_state_to_obj(state), sort_keys=True) + "\n")


def load_chain(path) -> Chain:
    """Reload a chain written by :func:`save_chain`."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != _SCHEMA:
            raise ValueError(f"{path}: unsupported chain schema "
                             f"{header.get('schema')!r}")
        samples = [_state_from_obj(json.loads(line))
                   for line in fh if line.strip()]
    if len(samples) != header["n_samples"]:
        raise ValueError(f"{path}: truncated chain file")
    return Chain(samples, None, header["link"], header.get("meta", {}))
