"""
Instantaneous-switch results for the generalized Jaynes-Cummings model.

Dressed states, the squeezed vacuum produced by the quench, the atomic
excitation series with its weak- and strong-coupling limits, and the mean
photon number in the presence of the atom.
"""

import math
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import gammaln

from app.core.exceptions import InputValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DressedCoeffs:
    """Mixing coefficients of the dressed pair built from |n,down> and |n-1,up>."""
    n: int
    R_plus: float
    R_minus: float
    S_plus: float
    S_minus: float
    Delta: float
    lam: float
    ground_state: bool = False


@dataclass(frozen=True)
class SqueezedVacuum:
    """Even Fock amplitudes c_{2j} of the quenched vacuum."""
    rho: float
    amplitudes: np.ndarray
    j_max: int
    norm_deficit: float

    def fock_amplitudes(self) -> np.ndarray:
        """Amplitudes on |0>, |1>, ..., |2 j_max> with the odd ones set to zero."""
        full = np.zeros(2 * self.j_max + 1)
        full[::2] = self.amplitudes
        return full


@dataclass(frozen=True)
class PhotonAmplitudes:
    """Final-state amplitudes of |0,down> after the quench, in the dressed basis at omega2."""
    A_down: np.ndarray
    A_up: np.ndarray


@dataclass(frozen=True)
class PhotonNumberReport:
    n_bar: float
    n_dce: float
    w_up: float
    direct_sum: float


def _mixing(n: int, Delta: float, lam: float) -> Tuple[float, float, float]:
    """Return (r, 2r + Delta, 2r - Delta) without cancellation."""
    r = math.sqrt(Delta * Delta / 4.0 + lam * lam * n)
    big = 2.0 * r + abs(Delta)
    # (2r - |Delta|) (2r + |Delta|) = 4 lam^2 n
    small = 4.0 * lam * lam * n / big
    if Delta >= 0:
        return r, big, small
    return r, small, big


def dressed_coeffs(n: int, Delta: float, lam: float) -> DressedCoeffs:
    """
    Dressed-state mixing coefficients R_n^(+-), S_n^(+-).

    |n,down>_dressed = S^- |n,down> - R^- |n-1,up>,
    |n-1,up>_dressed = R^+ |n-1,up> + S^+ |n,down>.
    Evaluated as R^+- = sqrt((2r +- Delta)/(4r)), S^+- = sqrt((2r -+ Delta)/(4r)),
    r = sqrt(Delta^2/4 + lam^2 n), which is continuous across Delta = 0.

    Args:
        n: Photon index (n = 0 returns the undressed ground state)
        Delta: Detuning E0 - omega
        lam: Coupling constant

    Returns:
        DressedCoeffs
    """
    if n < 0:
        raise InputValidationError("photon index must be non-negative")
    if n == 0:
        return DressedCoeffs(n=0, R_plus=math.nan, R_minus=0.0, S_plus=math.nan, S_minus=1.0,
                             Delta=Delta, lam=lam, ground_state=True)
    if Delta == 0.0 and lam == 0.0:
        raise InputValidationError("dressed states undefined for Delta = 0 and lambda = 0")

    r, u_plus, u_minus = _mixing(n, Delta, lam)
    R_plus = math.sqrt(u_plus / (4.0 * r))
    R_minus = math.sqrt(u_minus / (4.0 * r))
    return DressedCoeffs(
        n=n,
        R_plus=R_plus,
        R_minus=R_minus,
        S_plus=R_minus,
        S_minus=R_plus,
        Delta=Delta,
        lam=lam,
    )


def excited_dressed_state(n: int, Delta: float, lam: float) -> Tuple[float, float]:
    """
    Dressed state of the pair (|n,down>, |n-1,up>) that connects to the bare
    excited level when the coupling is switched off.

    For Delta >= 0 this is the |n-1,up>_dressed state; for Delta < 0 the labels
    swap and it is |n,down>_dressed.

    Returns:
        (coefficient on |n,down>, coefficient on |n-1,up>)
    """
    c = dressed_coeffs(n, Delta, lam)
    if Delta >= 0:
        return c.S_plus, c.R_plus
    return c.S_minus, -c.R_minus


def dressed_energies(n: int, omega: float, E0: float, lam: float) -> Tuple[float, float]:
    """Energies (E_{n,down}, E_{n-1,up}) of the dressed pair."""
    if n < 1:
        raise InputValidationError("dressed energies need n >= 1")
    Delta = E0 - omega
    root = math.sqrt(Delta * Delta / 4.0 + lam * lam * n)
    base = omega * n + Delta / 2.0
    return base - root, base + root


def _check_rho(rho: float) -> None:
    if not (math.isfinite(rho) and rho > 0):
        raise InputValidationError(f"frequency ratio must be positive and finite, got {rho}")


def squeezed_vacuum_amplitudes(rho: float, series_tol: float, moment: int = 0) -> SqueezedVacuum:
    """
    Fock amplitudes of the quenched vacuum e^{-iW}|0>.

    c_{2j} = (2 sqrt(rho)/(1+rho))^{1/2} (-q)^j sqrt((2j-1)!!/(2^j j!)), q = (rho-1)/(rho+1).
    The sum stops once the bound on the remaining probability (weighted by
    photon number when ``moment`` = 1) falls below ``series_tol``; the result is
    not renormalised.

    Args:
        rho: Frequency ratio omega2 / omega1
        series_tol: Truncation threshold
        moment: 0 to bound the probability tail, 1 to bound the photon-number tail

    Returns:
        SqueezedVacuum
    """
    _check_rho(rho)
    q = (rho - 1.0) / (rho + 1.0)
    q2 = q * q
    prefactor = 2.0 * math.sqrt(rho) / (1.0 + rho)

    j = 0
    probs = [prefactor]
    if q2 > 0.0:
        while True:
            # t_{j+1} / t_j = q^2 (2j+1)/(2j+2) < q^2
            ratio = q2
            tail = probs[-1] * ratio / (1.0 - ratio)
            if moment:
                tail = 2.0 * probs[-1] * (j * ratio / (1.0 - ratio) + ratio / (1.0 - ratio) ** 2)
            if tail < series_tol or j > 10_000_000:
                break
            probs.append(probs[-1] * q2 * (2 * j + 1) / (2 * j + 2))
            j += 1

    js = np.arange(j + 1)
    log_g = gammaln(2 * js + 1) - js * math.log(4.0) - 2.0 * gammaln(js + 1)
    amplitudes = math.sqrt(prefactor) * np.power(-q, js) * np.exp(0.5 * log_g)
    deficit = 1.0 - float(np.sum(amplitudes ** 2))
    return SqueezedVacuum(rho=rho, amplitudes=amplitudes, j_max=j, norm_deficit=deficit)


def squeezed_one_photon(vacuum: SqueezedVacuum, theta: float) -> np.ndarray:
    """
    <k| e^{-iW} |1> on k = 0..2 j_max + 1.

    Uses e^{-iW} a^dag e^{iW} = a^dag cosh(theta) + a sinh(theta) acting on the
    squeezed vacuum.
    """
    c = vacuum.fock_amplitudes()
    size = len(c) + 1
    c_ext = np.zeros(size + 1)
    c_ext[: len(c)] = c
    k = np.arange(size)
    d = np.zeros(size)
    d[1:] += math.cosh(theta) * np.sqrt(k[1:]) * c_ext[k[1:] - 1]
    d += math.sinh(theta) * np.sqrt(k + 1) * c_ext[k + 1]
    return d


def _reciprocal_denominator(j: np.ndarray, xi: float) -> np.ndarray:
    """xi^2 / (1/2 + 4 xi^2 (j+1) + sqrt(1/4 + 2 xi^2 (j+1)))."""
    m = j + 1.0
    if abs(xi) > 1e6:
        inv = 1.0 / xi
        return 1.0 / (0.5 * inv * inv + 4.0 * m + abs(inv) * np.sqrt(0.25 * inv * inv + 2.0 * m))
    x2 = xi * xi
    return x2 / (0.5 + 4.0 * x2 * m + np.sqrt(0.25 + 2.0 * x2 * m))


def _check_xi(xi: float) -> None:
    if math.isnan(xi):
        raise InputValidationError("dimensionless coupling xi is NaN")
    if math.isinf(xi):
        raise InputValidationError(
            "xi is infinite (exact resonance); use excitation_strong_coupling for this limit"
        )


def excitation_probability_sudden(rho: float, xi: float, series_tol: float) -> float:
    """
    Probability of atomic excitation after an instantaneous quench.

    Sums prefactor * sum_j (2j+1)!!/(2^j j!) q^{2j} xi^2 / D_j, with
    prefactor 2 sqrt(rho) (rho-1)^2 / (1+rho)^3 and
    D_j = 1/2 + 4 xi^2 (j+1) + sqrt(1/4 + 2 xi^2 (j+1)). The sum stops once a
    bound on the remaining terms falls below ``series_tol`` times the partial sum.

    Args:
        rho: Frequency ratio omega2 / omega1
        xi: Dimensionless coupling lambda / Delta
        series_tol: Relative truncation threshold

    Returns:
        Excitation probability in [0, 1/2]
    """
    _check_rho(rho)
    _check_xi(xi)
    if rho == 1.0 or xi == 0.0:
        return 0.0

    q = (rho - 1.0) / (rho + 1.0)
    q2 = q * q
    prefactor = 2.0 * math.sqrt(rho) * (rho - 1.0) ** 2 / (1.0 + rho) ** 3

    total = 0.0
    chunk = 256
    start = 0
    while True:
        j = np.arange(start, start + chunk, dtype=float)
        log_g = gammaln(2 * j + 2) - j * math.log(4.0) - 2.0 * gammaln(j + 1)
        terms = np.exp(log_g + 2.0 * j * math.log(abs(q))) * _reciprocal_denominator(j, xi)
        partial = np.cumsum(terms) + total
        # later term ratios stay below q^2 (2j+3)/(2j+2)
        ratio = q2 * (2 * j + 3) / (2 * j + 2)
        bound = np.where(ratio < 1.0, terms * ratio / np.maximum(1.0 - ratio, 1e-300), np.inf)
        done = np.nonzero(bound < series_tol * partial)[0]
        if done.size:
            total = float(partial[done[0]])
            break
        total = float(partial[-1])
        start += chunk
        if start > 50_000_000:
            logger.warning(f"Excitation series not converged for rho={rho}, xi={xi}")
            break
    return prefactor * total


def excitation_weak_coupling(rho: float, xi: float) -> float:
    """Weak-coupling expansion of the excitation probability, in its published closed form."""
    _check_rho(rho)
    n_bar = (rho - 1.0) ** 2 / (4.0 * rho)
    bracket = 1.0 + n_bar / (2.0 * (n_bar + 1.0)) * (1.0 - 3.0 * (n_bar + 1.0) ** -1.25)
    return xi * xi * n_bar * (1.0 - 6.0 * xi * xi / (n_bar + 1.0) * bracket)


def excitation_weak_coupling_series(rho: float, xi: float) -> float:
    """
    Term-by-term expansion of the excitation series to order xi^4:
    xi^2 N (1 - 6 xi^2 (1 + 3N/2)), N the quench photon number.
    """
    _check_rho(rho)
    n_bar = (rho - 1.0) ** 2 / (4.0 * rho)
    return xi * xi * n_bar * (1.0 - 6.0 * xi * xi * (1.0 + 1.5 * n_bar))


def excitation_strong_coupling(rho: float) -> float:
    """Strong-coupling (or resonant) limit N / (2 (1 + N + sqrt(N + 1)))."""
    _check_rho(rho)
    n_bar = (rho - 1.0) ** 2 / (4.0 * rho)
    return n_bar / (2.0 * (1.0 + n_bar + math.sqrt(n_bar + 1.0)))


def photon_amplitudes(rho: float, xi: float, series_tol: float) -> PhotonAmplitudes:
    """
    Amplitudes A_{n,down} = s_down(n) c_n and A_{n,up} = s_up(n+1) c_{n+1}.

    s_up(m) is the overlap of the excited dressed state of the pair
    (|m,down>, |m-1,up>) with |m,down>, s_down(m) the overlap of the other one;
    they depend on lambda and Delta only through xi.
    """
    _check_rho(rho)
    _check_xi(xi)
    vacuum = squeezed_vacuum_amplitudes(rho, series_tol, moment=1)
    c = vacuum.fock_amplitudes()
    size = len(c)
    s_up = np.zeros(size)
    s_down = np.ones(size)
    lam = abs(xi)
    if lam > 0.0:
        for m in range(1, size):
            coeffs = dressed_coeffs(m, 1.0, lam)
            s_up[m] = coeffs.S_plus
            s_down[m] = coeffs.S_minus
    A_down = s_down * c
    A_up = np.zeros(size)
    A_up[: size - 1] = s_up[1:] * c[1:]
    return PhotonAmplitudes(A_down=A_down, A_up=A_up)


def excitation_probability_from_amplitudes(rho: float, xi: float, series_tol: float) -> float:
    """Excitation probability summed directly over the amplitude table."""
    amps = photon_amplitudes(rho, xi, series_tol)
    return float(np.sum(amps.A_up ** 2))


def mean_photons_with_atom(rho: float, xi: float, series_tol: float) -> PhotonNumberReport:
    """
    Mean photon number created with the atom present, N_DCE - w_up.

    Also reports the direct sum over n (|A_{n,down}|^2 + |A_{n,up}|^2) n.
    """
    _check_rho(rho)
    n_dce = (rho - 1.0) ** 2 / (4.0 * rho)
    w_up = excitation_probability_sudden(rho, xi, series_tol)
    amps = photon_amplitudes(rho, xi, series_tol)
    n = np.arange(len(amps.A_down))
    direct = float(np.sum(n * (amps.A_down ** 2 + amps.A_up ** 2)))
    return PhotonNumberReport(n_bar=n_dce - w_up, n_dce=n_dce, w_up=w_up, direct_sum=direct)
