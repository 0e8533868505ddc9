"""Binary checkpoints for streaming fits.

A checkpoint captures everything a :class:`~resave.save.RecursiveFit`
carries — the schedule constants, kernel name, frozen whitening, the full
absorbed history with its per-observation bandwidths and ledger weights,
and the tracked moment values — so a reloaded fit continues bit-for-bit
where the saved one stopped.  Format: a ``numpy.savez`` archive with an
explicit ``format_version`` entry, checked on load.
"""
from __future__ import annotations

import numpy as np

from .errors import SchemaError
from .kernels import kernel_by_name
from .linalg import SymMatrix
from .recursive import RecursiveState
from .save import RecursiveFit, Standardizer, _refresh
from .sequences import SequencePlan, WeightLedger

FORMAT_VERSION = 1


def save_checkpoint(fit, path):
    """Write a recursive fit to exactly ``path`` (npz layout inside)."""
    state = fit.state
    n = state.n
    with open(path, "wb") as fh:
        _savez(fh, fit, state, n)


def _savez(fh, fit, state, n):
    np.savez(
        fh,
        format_version=np.array(FORMAT_VERSION),
        d=np.array(state.d),
        n=np.array(n),
        num_directions=np.array(fit.num_directions),
        kernel=np.array(fit.kernel.name),
        plan=np.array(
            [fit.plan.gamma_scale, fit.plan.c1, fit.plan.c2, fit.plan.epsilon_trunc]
        ),
        plan_strict=np.array(fit.plan.strict),
        std_mean=fit.standardizer.mean,
        std_transform=fit.standardizer.transform.packed,
        ys=state.ys.copy(),
        hs=state.bandwidths.copy(),
        xs=state.xs.copy(),
        xx=state._xx[:n].copy(),
        density=state.density.copy(),
        first=state.first_moment.copy(),
        second=state.second_moment_packed.copy(),
        weights=np.asarray(state.ledger.weights),
        remaining_mass=np.array(state.ledger.remaining_mass),
    )


def load_checkpoint(path):
    """Reconstruct a :class:`RecursiveFit` from a checkpoint file."""
    with np.load(path, allow_pickle=False) as z:
        try:
            version = int(z["format_version"])
            if version != FORMAT_VERSION:
                raise SchemaError(
                    f"checkpoint format version {version} not supported "
                    f"(expected {FORMAT_VERSION})"
                )
            d = int(z["d"])
            n = int(z["n"])
            gamma_scale, c1, c2, eps = (float(v) for v in z["plan"])
            plan = SequencePlan(gamma_scale, c1, c2, eps, strict=bool(z["plan_strict"]))
            try:
                kernel = kernel_by_name(str(z["kernel"]))
            except ValueError as exc:
                raise SchemaError(str(exc)) from None
            std = Standardizer(z["std_mean"].copy(), SymMatrix(d, z["std_transform"]))
            state = RecursiveState(d, plan, kernel)
            state._ensure_capacity(n)
            state._ys[:n] = z["ys"]
            state._hs[:n] = z["hs"]
            state._xs[:n] = z["xs"]
            state._xx[:n] = z["xx"]
            state._density[:n] = z["density"]
            state._first[:n] = z["first"]
            state._second[:n] = z["second"]
            state.ledger = WeightLedger(n, float(z["remaining_mass"]), z["weights"].copy())
            state.n = n
            num_directions = int(z["num_directions"])
        except KeyError as exc:
            raise SchemaError(f"checkpoint is missing field {exc}") from None
    fit = RecursiveFit(
        save_matrix=None, directions=None, standardizer=std,
        state=state, plan=plan, kernel=kernel, num_directions=num_directions,
    )
    _refresh(fit)
    return fit
