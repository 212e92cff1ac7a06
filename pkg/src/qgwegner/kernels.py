"""Backend selection for the inertia and QL kernels.

The compiled extension is used when importable. ``QGWEGNER_BACKEND`` set to
``python`` forces the fallback; ``compiled`` makes a missing extension an
import error.
"""
import os

from . import _pykernels as python_backend

_choice = os.environ.get("QGWEGNER_BACKEND", "auto").lower()

try:
    if _choice == "python":
        raise ImportError("python backend requested")
    from . import _kernels as compiled_backend
except ImportError:
    if _choice == "compiled":
        raise
    compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

band_inertia = active.band_inertia
band_count_many = active.band_count_many
dense_inertia = active.dense_inertia
tql_eigenvalues = active.tql_eigenvalues
