"""
JIT-compiled direct-method SSA with streaming likelihood-ratio accumulators.

Everything in this module works on flat numpy arrays so that numba can compile it. The rate laws
are encoded by kind code:

    0: mass action       a = c[p1] * prod falling factorials of the reactants
    1: hill              a = x[s]^n / (c[p1] + x[s]^n)
    2: repressive hill   a = c[p1] * c[p2]^n / (c[p2]^n + x[s]^n)

Accumulators live in one float vector `acc` with a Kahan compensation vector alongside:

    [ Z (K) | int Z (K) | int a_j (m) | int f (O) | int f Z (O*K) | int (f - center) Z (O*K) ]
"""
from typing import NamedTuple

from numba import njit
import numpy as np

KIND_MASS_ACTION = 0
KIND_HILL = 1
KIND_REPRESSIVE_HILL = 2

STATUS_OK = 0
STATUS_ABSORBED = 1
STATUS_BAD_INTENSITY = 2
STATUS_BAD_ACCUMULATOR = 3
STATUS_ZERO_INTENSITY_JUMP = 4
STATUS_NEGATIVE_STATE = 5

# Layout -------------------------------------------------------------------------------------------

class Layout(NamedTuple):
    num_params: int
    num_reactions: int
    num_observables: int

    @property
    def z(self) -> slice:
        return slice(0, self.num_params)

    @property
    def int_z(self) -> slice:
        return slice(self.num_params, 2*self.num_params)

    @property
    def int_a(self) -> slice:
        start = 2*self.num_params
        return slice(start, start + self.num_reactions)

    @property
    def int_f(self) -> slice:
        start = 2*self.num_params + self.num_reactions
        return slice(start, start + self.num_observables)

    @property
    def int_fz(self) -> slice:
        start = 2*self.num_params + self.num_reactions + self.num_observables
        return slice(start, start + self.num_observables*self.num_params)

    @property
    def int_fcz(self) -> slice:
        start = self.int_fz.stop
        return slice(start, start + self.num_observables*self.num_params)

    @property
    def size(self) -> int:
        return self.int_fcz.stop

# Kernel Helpers -----------------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def _kahan_add(acc, comp, i, value):
    y = value - comp[i]
    t = acc[i] + y
    comp[i] = (t - acc[i]) - y
    acc[i] = t


@njit(cache=True, error_model="numpy")
def _propensities(x, c, kinds, p1, p2, exponents, species, reactants, param_pos, a, da):
    """
    Fill `a` with the intensities and `da[j, k]` with the derivative of a_j with respect to the
    k-th parameter of interest.
    """
    m = kinds.shape[0]
    n = x.shape[0]
    da[:, :] = 0.0
    for j in range(m):
        kind = kinds[j]
        if kind == KIND_MASS_ACTION:
            b = 1.0
            for i in range(n):
                for r in range(reactants[j, i]):
                    b *= x[i] - r
                    if b == 0.0:
                        break
                if b == 0.0:
                    b = 0.0
                    break
            a[j] = c[p1[j]]*b
            pos = param_pos[p1[j]]
            if pos >= 0:
                da[j, pos] += b
        elif kind == KIND_HILL:
            xn = float(x[species[j]])**exponents[j]
            denom = c[p1[j]] + xn
            a[j] = xn/denom
            pos = param_pos[p1[j]]
            if pos >= 0:
                da[j, pos] += -xn/(denom*denom)
        else:
            nexp = exponents[j]
            phi = c[p2[j]]
            phin = phi**nexp
            xn = float(x[species[j]])**nexp
            denom = phin + xn
            a[j] = c[p1[j]]*phin/denom
            pos = param_pos[p1[j]]
            if pos >= 0:
                da[j, pos] += phin/denom
            pos = param_pos[p2[j]]
            if pos >= 0:
                da[j, pos] += c[p1[j]]*nexp*phi**(nexp - 1.0)*xn/(denom*denom)


@njit(cache=True, error_model="numpy")
def _observe(x, o, weights, offsets, is_table, radix, strides, ptr, keys, values, defaults):
    n = x.shape[0]
    if is_table[o] == 0:
        s = offsets[o]
        for i in range(n):
            s += weights[o, i]*x[i]
        return s
    key = 0
    for i in range(n):
        if x[i] >= radix[o, i]:
            return defaults[o]
        key += x[i]*strides[o, i]
    lo = ptr[o]
    hi = ptr[o + 1]
    if hi == lo:
        return defaults[o]
    idx = np.searchsorted(keys[lo:hi], key)
    if idx < hi - lo and keys[lo + idx] == key:
        return values[lo + idx]
    return defaults[o]


@njit(cache=True, error_model="numpy")
def _hold(acc, comp, a, da, fvals, center, dt, num_params, num_reactions, num_obs):
    """
    Integrate all accumulators in closed form over a hold of length `dt` in a fixed state.
    """
    K = num_params
    off_int_a = 2*K
    off_int_f = off_int_a + num_reactions
    off_int_fz = off_int_f + num_obs
    off_int_fcz = off_int_fz + num_obs*K
    for k in range(K):
        drift = 0.0
        for j in range(num_reactions):
            drift += da[j, k]
        z0 = acc[k]
        int_z = z0*dt - 0.5*drift*dt*dt
        _kahan_add(acc, comp, K + k, int_z)
        for o in range(num_obs):
            _kahan_add(acc, comp, off_int_fz + o*K + k, fvals[o]*int_z)
            _kahan_add(acc, comp, off_int_fcz + o*K + k, (fvals[o] - center[o])*int_z)
        _kahan_add(acc, comp, k, -drift*dt)
    for j in range(num_reactions):
        _kahan_add(acc, comp, off_int_a + j, a[j]*dt)
    for o in range(num_obs):
        _kahan_add(acc, comp, off_int_f + o, fvals[o]*dt)

# Kernel -------------------------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def simulate_kernel(
    rng,
    x0,
    c,
    kinds,
    p1,
    p2,
    exponents,
    species,
    reactants,
    net,
    param_pos,
    num_params,
    weights,
    offsets,
    is_table,
    radix,
    strides,
    ptr,
    keys,
    values,
    defaults,
    center,
    checkpoints,
    record,
    replay,
    replay_times,
    replay_reactions
):
    """
    Run one trajectory from `x0` through the last checkpoint.

    When `replay` is set, jump times and reactions are read from `replay_times` and
    `replay_reactions` instead of being drawn from `rng`.
    """
    m = kinds.shape[0]
    n = x0.shape[0]
    num_obs = offsets.shape[0]
    K = num_params
    size = 2*K + m + num_obs + 2*num_obs*K
    n_cp = checkpoints.shape[0]

    x = x0.copy()
    acc = np.zeros(size)
    comp = np.zeros(size)
    counts = np.zeros(m, dtype=np.int64)
    a = np.zeros(m)
    da = np.zeros((m, max(K, 1)))
    fvals = np.zeros(num_obs)

    snap_x = np.zeros((n_cp, n), dtype=np.int64)
    snap_acc = np.zeros((n_cp, size))
    snap_counts = np.zeros((n_cp, m), dtype=np.int64)

    capacity = 1024 if record else 1
    ev_t = np.zeros(capacity)
    ev_j = np.zeros(capacity, dtype=np.int64)
    ev_x = np.zeros((capacity, n), dtype=np.int64)
    n_events = 0

    status = STATUS_OK
    absorbed = False
    fail_time = 0.0
    t = 0.0
    cp = 0
    e = 0

    _propensities(x, c, kinds, p1, p2, exponents, species, reactants, param_pos, a, da)
    for o in range(num_obs):
        fvals[o] = _observe(x, o, weights, offsets, is_table, radix, strides, ptr, keys, values,
                            defaults)

    while True:
        total = 0.0
        for j in range(m):
            total += a[j]
        if not np.isfinite(total):
            status = STATUS_BAD_INTENSITY
            fail_time = t
            break

        if replay:
            if e < replay_times.shape[0]:
                t_next = replay_times[e]
            else:
                t_next = np.inf
        elif total > 0.0:
            t_next = t + rng.standard_exponential()/total
        else:
            t_next = np.inf
        if total <= 0.0:
            absorbed = True

        while cp < n_cp and checkpoints[cp] < t_next:
            _hold(acc, comp, a, da, fvals, center, checkpoints[cp] - t, K, m, num_obs)
            t = checkpoints[cp]
            snap_x[cp, :] = x
            snap_acc[cp, :] = acc
            snap_counts[cp, :] = counts
            cp += 1
            if not np.isfinite(acc).all():
                status = STATUS_BAD_ACCUMULATOR
                fail_time = t
                break
        if status != STATUS_OK or cp == n_cp:
            break
        if t_next == np.inf:
            break

        _hold(acc, comp, a, da, fvals, center, t_next - t, K, m, num_obs)
        t = t_next

        if replay:
            rxn = replay_reactions[e]
        else:
            q = rng.random()*total
            rxn = 0
            cumulative = a[0]
            while cumulative <= q and rxn < m - 1:
                rxn += 1
                cumulative += a[rxn]
            # Never select a reaction with zero intensity at the tail of the cumulative sum
            while a[rxn] <= 0.0 and rxn > 0:
                rxn -= 1
        e += 1
        if a[rxn] <= 0.0:
            status = STATUS_ZERO_INTENSITY_JUMP
            fail_time = t
            break

        if record:
            if n_events == ev_t.shape[0]:
                grown_t = np.zeros(2*n_events)
                grown_j = np.zeros(2*n_events, dtype=np.int64)
                grown_x = np.zeros((2*n_events, n), dtype=np.int64)
                grown_t[:n_events] = ev_t
                grown_j[:n_events] = ev_j
                grown_x[:n_events] = ev_x
                ev_t = grown_t
                ev_j = grown_j
                ev_x = grown_x
            ev_t[n_events] = t
            ev_j[n_events] = rxn
            ev_x[n_events, :] = x
            n_events += 1

        for k in range(K):
            if da[rxn, k] != 0.0:
                _kahan_add(acc, comp, k, da[rxn, k]/a[rxn])
        counts[rxn] += 1
        for i in range(n):
            x[i] += net[rxn, i]
            if x[i] < 0:
                status = STATUS_NEGATIVE_STATE
        if status != STATUS_OK:
            fail_time = t
            break

        _propensities(x, c, kinds, p1, p2, exponents, species, reactants, param_pos, a, da)
        for o in range(num_obs):
            fvals[o] = _observe(x, o, weights, offsets, is_table, radix, strides, ptr, keys,
                                values, defaults)

    if status == STATUS_OK and absorbed:
        status = STATUS_ABSORBED
    return (
        status,
        fail_time,
        snap_x,
        snap_acc,
        snap_counts,
        n_events,
        ev_t[:n_events],
        ev_j[:n_events],
        ev_x[:n_events]
    )
