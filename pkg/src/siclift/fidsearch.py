"""Numerical SIC fiducial search and high-precision refinement.

A fiducial is a unit vector whose Weyl-Heisenberg orbit forms an equiangular
set: (d+1)|chi_p|^2 = 1 for every p not = 0 mod d. The search runs at double
precision (numpy/scipy) inside an eigenspace of the canonical order-3 unitary;
refinement is a Gauss-Newton ladder in mpmath whose working precision roughly
doubles per sweep, with an analytic Wirtinger Jacobian.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import mpmath as mp
import numpy as np
from scipy.optimize import least_squares

from . import heisenberg as hb
from .bignum import CMatrix, CVector, format_decimal, guarded, parse_decimal, solve_linear
from .errors import PrecisionError, RefinementError, SearchError
from .modring import ModMatrix, dprime, esl2_elements, fa_matrix, zauner_matrix

log = logging.getLogger("siclift.fidsearch")

_SYMMETRY_MATRIX = {"fz": zauner_matrix, "fa": fa_matrix}


@dataclass(frozen=True)
class Fiducial:
    d: int
    vector: CVector
    precision: int
    symmetry: str | None = None  # "fz" | "fa" | None
    orbit: str | None = None
    seed: int | None = None
    error: object = None  # mpf SIC error, recorded at creation

    @classmethod
    def create(cls, d, vector, precision, symmetry=None, orbit=None, seed=None):
        """Normalize and record the SIC error; the only intended constructor."""
        with mp.workdps(guarded(precision)):
            v = vector.scale(1 / vector.norm())
        err = hb.overlaps(v, d, precision).sic_error()
        return cls(d, v, precision, symmetry, orbit, seed, err)

    def save(self, path: str):
        tag = self.symmetry or "none"
        seed = "none" if self.seed is None else str(self.seed)
        lines = [f"SIC-FIDUCIAL v1 d={self.d} prec={self.precision} "
                 f"symmetry={tag} seed={seed}"]
        for z in self.vector.entries:
            lines.append(f"{format_decimal(z.real, self.precision)} "
                         f"{format_decimal(z.imag, self.precision)}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str) -> "Fiducial":
        with open(path) as fh:
            header = fh.readline().split()
            if header[:2] != ["SIC-FIDUCIAL", "v1"]:
                raise ValueError("not a fiducial file")
            fields = dict(kv.split("=") for kv in header[2:])
            d, prec = int(fields["d"]), int(fields["prec"])
            tag = fields.get("symmetry", "none")
            seed = fields.get("seed", "none")
            entries = []
            with mp.workdps(guarded(prec)):
                for line in fh:
                    if not line.strip():
                        continue
                    re_s, im_s = line.split()
                    entries.append(mp.mpc(parse_decimal(re_s, prec),
                                          parse_decimal(im_s, prec)))
        if len(entries) != d:
            raise ValueError(f"expected {d} entries, got {len(entries)}")
        return cls.create(d, CVector(entries, prec), prec,
                          symmetry=None if tag == "none" else tag,
                          seed=None if seed == "none" else int(seed))


# ---------------------------------------------------------------------------
# double-precision seed search


def _np_unitary(F: ModMatrix, d: int) -> np.ndarray:
    U = hb.symplectic_unitary(F, d, 20).matrix
    with mp.workdps(30):
        return np.array([[complex(e) for e in row] for row in U.rows])


def _eigen_sectors(U: np.ndarray) -> list[tuple[complex, np.ndarray]]:
    """Orthonormal bases of the eigenspaces of an order-3 (up to phase)
    unitary, largest multiplicity first."""
    d = U.shape[0]
    cube = U @ U @ U
    c = cube[0, 0]
    if np.abs(cube - c * np.eye(d)).max() > 1e-8:
        raise ValueError("symmetry unitary is not order 3 up to a phase")
    mu = c ** (1 / 3)
    sectors = []
    for k in range(3):
        lam = mu * np.exp(2j * np.pi * k / 3)
        # orthonormal null-space basis of U - lam via SVD
        _, s, vh = np.linalg.svd(U - lam * np.eye(d))
        cols = vh[s < 1e-8].conj().T
        if cols.shape[1]:
            sectors.append((lam, cols))
    sectors.sort(key=lambda t: (-t[1].shape[1], np.angle(t[0])))
    return sectors


def _np_sic_residuals(x: np.ndarray, B: np.ndarray, d: int,
                      idx: np.ndarray) -> np.ndarray:
    k = B.shape[1]
    z = x[:k] + 1j * x[k:]
    psi = B @ z
    nrm = np.linalg.norm(psi)
    if nrm < 1e-12:
        return np.full(d * d, 1e6)
    psi = psi / nrm
    corr = np.conj(psi[idx]) * psi[None, :]          # [p1, s]
    amp = np.fft.ifft(corr, axis=1) * d              # [p1, p2] = chi / tau-phase
    g = (d + 1) * np.abs(amp) ** 2 - 1.0
    g[0, 0] = 0.0
    return g.ravel()


def seed_search(d: int, symmetry: str | None = "fz", attempts: int = 24,
                low_precision: int = 14, seed: int = 0) -> Fiducial:
    """Best-of-`attempts` random-restart search for a SIC fiducial at double
    precision, restricted to one symmetry eigenspace at a time (largest
    multiplicity first, then the others)."""
    if not 4 <= d <= 24:
        raise ValueError("seed search supports 4 <= d <= 24")
    if symmetry is not None and symmetry not in _SYMMETRY_MATRIX:
        raise ValueError(f"unknown symmetry tag {symmetry!r}")
    rng = np.random.default_rng(seed)
    idx = (np.arange(d)[:, None] + np.arange(d)[None, :]) % d
    if symmetry is None:
        sectors = [(None, np.eye(d, dtype=complex))]
    else:
        F = _SYMMETRY_MATRIX[symmetry](d)
        sectors = _eigen_sectors(_np_unitary(F, d))
    best_err, best_psi = np.inf, None
    for snum, (lam, B) in enumerate(sectors):
        k = B.shape[1]
        sector_err = np.inf
        for _ in range(attempts):
            x0 = rng.standard_normal(2 * k)
            fit = least_squares(_np_sic_residuals, x0, args=(B, d, idx),
                                method="lm", xtol=1e-15, ftol=1e-15,
                                max_nfev=400 * (2 * k))
            err = np.abs(fit.fun).max()
            if err < sector_err:
                sector_err = err
            if err < best_err:
                z = fit.x[:k] + 1j * fit.x[k:]
                psi = B @ z
                best_err, best_psi = err, psi / np.linalg.norm(psi)
            if best_err < 1e-12:
                break
        log.info("seed_search d=%d sector %d (dim %d): best residual %.3g",
                 d, snum, k, sector_err)
        if best_err < 1e-10:
            break
    if best_err >= 1e-10 or best_psi is None:
        raise SearchError(
            f"no restart converged for d={d} (best residual {best_err:.3g})",
            best_error=best_err)
    with mp.workdps(guarded(low_precision)):
        # gauge: make the largest component real positive
        kbig = int(np.argmax(np.abs(best_psi)))
        phase = np.conj(best_psi[kbig]) / np.abs(best_psi[kbig])
        entries = [mp.mpc(float((z * phase).real), float((z * phase).imag))
                   for z in best_psi]
        vec = CVector(entries, low_precision)
    return Fiducial.create(d, vec, low_precision, symmetry=symmetry, seed=seed)


# ---------------------------------------------------------------------------
# high-precision refinement


def _chi_period(psi: list, d: int, taus) -> dict:
    """Raw chi_p over one period p in (Z/d)^2; runs in the caller's context."""
    n = 2 * d
    out = {}
    conj_psi = [mp.conj(x) for x in psi]
    for p1 in range(d):
        for p2 in range(d):
            out[(p1, p2)] = mp.fsum(
                (conj_psi[(s + p1) % d] * taus[(p1 * p2 + 2 * p2 * s) % n] * psi[s]
                 for s in range(d)), absolute=False)
    return out


def _period_error(psi: list, d: int, taus):
    """Max SIC residual of psi/|psi| over one period; caller's context."""
    nrm2 = mp.fsum(abs(x) ** 2 for x in psi)
    chi = _chi_period(psi, d, taus)
    worst = mp.mpf(0)
    for p, v in chi.items():
        if p == (0, 0):
            continue
        worst = max(worst, abs((d + 1) * abs(v) ** 2 / nrm2 ** 2 - 1))
    return worst


def _sic_system(psi: list, d: int, gauge: int, taus) -> tuple[list, list]:
    """Residuals and analytic Jacobian of the SIC system in the real
    parametrization (u_0..u_{d-1}, v_0..v_{d-1}), including the norm row and
    the Im(psi_gauge) = 0 phase-fixing row. Caller's context."""
    n = 2 * d
    chi = _chi_period(psi, d, taus)
    conj_psi = [mp.conj(x) for x in psi]
    rows, res = [], []
    for p1 in range(d):
        for p2 in range(d):
            if p1 == 0 and p2 == 0:
                continue
            c = chi[(p1, p2)]
            cbar = mp.conj(c)
            row = [mp.mpf(0)] * (2 * d)
            for t in range(d):
                # Wirtinger derivative of (d+1)|chi|^2 - 1 w.r.t. psi_t
                dchi = taus[(p1 * p2 + 2 * p2 * t) % n] * conj_psi[(t + p1) % d]
                dchibar = mp.conj(taus[(p1 * p2 + 2 * p2 * ((t - p1) % d)) % n]
                                  * psi[(t - p1) % d])
                w = (d + 1) * (cbar * dchi + c * dchibar)
                row[t] = 2 * w.real
                row[d + t] = -2 * w.imag
            rows.append(row)
            res.append((d + 1) * (c * cbar).real - 1)
    nrow = [2 * psi[t].real for t in range(d)] + [2 * psi[t].imag for t in range(d)]
    rows.append(nrow)
    res.append(mp.fsum(abs(x) ** 2 for x in psi) - 1)
    grow = [mp.mpf(0)] * (2 * d)
    grow[d + gauge] = mp.mpf(1)
    rows.append(grow)
    res.append(psi[gauge].imag)
    return rows, res


def _newton_step(psi: list, d: int, gauge: int, taus) -> list:
    """One Gauss-Newton step via the normal equations. Caller's context."""
    rows, rhs_res = _sic_system(psi, d, gauge, taus)
    m = len(rows)
    jtj = [[mp.fsum(rows[r][i] * rows[r][j] for r in range(m))
            for j in range(2 * d)] for i in range(2 * d)]
    rhs = [-mp.fsum(rows[r][i] * rhs_res[r] for r in range(m))
           for i in range(2 * d)]
    sol = solve_linear(CMatrix(jtj, mp.mp.dps), CVector(rhs, mp.mp.dps))
    return [x.real for x in sol.x.entries]


def refine(fid: Fiducial, target_digits: int) -> Fiducial:
    """Polish a fiducial until its SIC error drops below
    10^(10 - target_digits). Working precision roughly doubles per accepted
    sweep; three sweeps without improvement abort with diagnostics."""
    err = fid.error
    goal = mp.mpf(10) ** (10 - target_digits)
    if err > mp.mpf("1e-8"):
        raise RefinementError(
            f"input error {mp.nstr(err, 3)} outside the Newton basin",
            best_error=err, sweeps=0)
    if err < goal and fid.precision >= target_digits:
        return fid
    cur = list(fid.vector.entries)
    with mp.workdps(guarded(fid.precision)):
        gauge = max(range(fid.d), key=lambda i: abs(cur[i]))
        ph = mp.conj(cur[gauge]) / abs(cur[gauge])
        cur = [z * ph for z in cur]
    d = fid.d
    stall, sweeps = 0, 0
    while True:
        sweeps += 1
        if sweeps > 80:
            raise RefinementError("sweep budget exhausted",
                                  best_error=err, sweeps=sweeps)
        correct = max(10, int(-mp.log(err, 10)))
        prec = min(target_digits, 2 * correct) + 25
        with mp.workdps(guarded(prec)):
            psi = [mp.mpc(z) for z in cur]
            taus = hb.tau_powers(d, prec)
            delta = _newton_step(psi, d, gauge, taus)
            new_err, cand, scale = None, None, mp.mpf(1)
            for _ in range(3):
                trial = [psi[t] + scale * mp.mpc(delta[t], delta[d + t])
                         for t in range(d)]
                e = _period_error(trial, d, taus)
                if new_err is None or e < new_err:
                    new_err, cand = e, trial
                if e < err:
                    break
                scale /= 2
        log.debug("refine d=%d sweep %d at %d digits: %s -> %s",
                  d, sweeps, prec, mp.nstr(err, 3), mp.nstr(new_err, 3))
        if new_err < err:
            cur, err, stall = cand, new_err, 0
        else:
            stall += 1
            if stall >= 3:
                raise RefinementError(
                    f"stagnated at error {mp.nstr(err, 3)} after {sweeps} sweeps",
                    best_error=err, sweeps=sweeps)
        if err < goal:
            break
    with mp.workdps(guarded(target_digits)):
        nrm = mp.sqrt(mp.fsum(abs(x) ** 2 for x in cur))
        vec = CVector([x / nrm for x in cur], target_digits)
    out = Fiducial.create(d, vec, target_digits, symmetry=fid.symmetry,
                          orbit=fid.orbit, seed=fid.seed)
    if out.error >= goal:
        raise RefinementError(
            f"final certification failed: error {mp.nstr(out.error, 3)}",
            best_error=out.error, sweeps=sweeps)
    return out


# ---------------------------------------------------------------------------
# stabilizer detection


def _centralizer_candidates(d: int, symmetry: str | None) -> list[ModMatrix]:
    dp = dprime(d)
    F = _SYMMETRY_MATRIX.get(symmetry or "fz", zauner_matrix)(d)
    seen = set()
    out = []
    for r in range(dp):
        for s in range(dp):
            # r*I + s*F_sym
            M = ModMatrix((r + s * F.a) % dp, (s * F.b) % dp,
                          (s * F.c) % dp, (r + s * F.d) % dp, dp)
            if M.det() in (1 % dp, (-1) % dp) and M.entries not in seen:
                seen.add(M.entries)
                out.append(M)
    return out


def detect_stabilizer(fid: Fiducial, full: bool = False,
                      tol=None) -> set[tuple[tuple[int, int], ModMatrix]]:
    """All (p, F) with D_p U_F fixing the fiducial's projector. p is reported
    mod d (displacement conjugation is d-periodic). By default only the
    candidates r*I + s*F_sym are scanned; full=True sweeps all of det +-1."""
    if fid.error > mp.mpf("1e-30"):
        raise PrecisionError(
            f"stabilizer scan needs error < 1e-30, have {mp.nstr(fid.error, 3)}")
    d, dp = fid.d, dprime(fid.d)
    if tol is None:
        tol = mp.mpf("1e-10")
    T = hb.overlaps(fid)
    cands = esl2_elements(dp) if full else _centralizer_candidates(d, fid.symmetry)
    out = set()
    wprec = min(fid.precision, 40)
    taus = hb.tau_powers(d, wprec)
    with mp.workdps(guarded(wprec)):
        omega = [taus[(2 * k) % (2 * d)] for k in range(d)]
        for F in cands:
            T1 = T.transported(F)
            # phases at q=(0,1) and q=(1,0) determine the displacement part
            a = T.chi((0, 1)) / T1.chi((0, 1))      # omega^p1
            b = T1.chi((1, 0)) / T.chi((1, 0))      # omega^p2
            p1 = min(range(d), key=lambda k: abs(a - omega[k]))
            p2 = min(range(d), key=lambda k: abs(b - omega[k]))
            if abs(a - omega[p1]) > mp.mpf("1e-6") or \
               abs(b - omega[p2]) > mp.mpf("1e-6"):
                continue
            ok = True
            for (q1, q2), v in T.items():
                e = (q2 * p1 - q1 * p2) % d
                if abs(omega[e] * T1.values[(q1, q2)] - v) > tol:
                    ok = False
                    break
            if ok:
                out.add(((p1, p2), F))
    return out


# ---------------------------------------------------------------------------
# strong centring


def displace(fid: Fiducial, p: tuple[int, int]) -> Fiducial:
    """The fiducial D_p|psi>, same precision and tags."""
    D = hb.displacement(p, fid.d, fid.precision)
    vec = D.matrix.matvec(fid.vector)
    return Fiducial.create(fid.d, vec, fid.precision, symmetry=fid.symmetry,
                           orbit=fid.orbit, seed=fid.seed)


def strongly_centre(fid: Fiducial, max_degree: int = 8,
                    precision: int | None = None,
                    return_shift: bool = False):
    """For d = 0 mod 3, pick among the nine displaced candidates D_p|psi>
    (p = 0 mod d/3) the one whose orbit-polynomial coefficients have minimal
    recovered algebraic degree; ties break lexicographically in p. Other
    dimensions pass through unchanged. With return_shift, the result is the
    pair (fiducial, chosen index shift)."""
    if fid.d % 3:
        return (fid, (0, 0)) if return_shift else fid
    from .exactify import orbit_coefficient_values
    from .lattice import minimal_polynomial

    n = fid.d // 3
    prec = precision or min(fid.precision, max(140, 12 * fid.d))
    unresolved = max_degree + 1
    best = None
    for a in range(3):
        for b in range(3):
            p = ((a * n) % fid.d, (b * n) % fid.d)
            cand = displace(fid, p)
            degs = [1]
            for val in orbit_coefficient_values(cand, precision=prec):
                poly = minimal_polynomial(val, max_degree, precision=prec)
                if poly is None:
                    # degree above the bound, or too few digits; either way
                    # this shift loses to any fully resolved one
                    degs = [unresolved]
                    break
                degs.append(poly.degree)
            score = (max(degs), (a, b))
            log.info("strongly_centre d=%d shift %s: max coefficient degree %s",
                     fid.d, p,
                     score[0] if score[0] <= max_degree else "unresolved")
            if best is None or score < best[0]:
                best = (score, cand, p)
    if best[0][0] == unresolved:
        raise PrecisionError(
            f"no displacement candidate resolved coefficient degrees at "
            f"{prec} digits (bound {max_degree}); increase precision")
    return (best[1], best[2]) if return_shift else best[1]
