import json
import os
import pathlib

from dotenv import load_dotenv

# Every numeric default of the toolkit lives here. Run-config files and the
# CLI only override these values, they never define their own fallbacks.
_DEFAULT = {
    "out_dir": "reports",
    "threads": 1,
    "seed": 20240601,
    "verbose": False,
    # sequences
    "generator_K": 1.0,
    "generator_g": 3.0,
    "poly": [1.0],
    # basin
    "c_max": 0.5,
    "escape_floor": 10.0,
    "n_max": 60,
    "probe_depth": 8,
    "nest_ratio": None,  # None -> (1 + M*c) / 2
    # potential
    "psi_tol": 1e-6,
    "psh_samples": 64,
    "psh_tol": 1e-3,
    # rasters
    "resolution": 201,
    "slice_extent": 3.0,
    "julia_iters": 200,
    "julia_escape": 4.0,
    # dimension
    "eps_decades": 2.0,
    "eps_count": 9,
    # conjugacy
    "fd_rel_step": 1e-6,
    "power_iters": 50,
    "m_safety": 2.0,
    "delta_safety": 0.5,
    "sphere_radii": 4,
    "sphere_samples": 64,
    # kobayashi
    "disc_samples": 64,
    # witnesses / suite
    "witness_budget": 256,
    "witness_eps_px": 4.0,
    "coupling_safety": 0.5,
    "julia_delta_frac": 0.05,
}

_CONFIG = None


def _load_config_file() -> dict:
    """Load config.json from project root, if present."""
    root = pathlib.Path(__file__).resolve().parent.parent
    path = root / "config.json"
    if not path.exists():
        return {}
    try:
        with path.open("r", encoding="utf-8") as f:
            data = json.load(f)
        if isinstance(data, dict):
            return data
    except Exception:
        pass
    return {}


def _int_env(name: str):
    raw = os.getenv(name)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def get_config() -> dict:
    """
    Return merged configuration:
    - defaults
    - overridden by config.json
    - overridden by env vars (a .env file is read first)
    """
    global _CONFIG
    if _CONFIG is not None:
        return _CONFIG

    load_dotenv()

    cfg = dict(_DEFAULT)
    cfg.update(_load_config_file())

    threads = _int_env("SCK_THREADS")
    seed = _int_env("SCK_SEED")
    n_max = _int_env("SCK_N_MAX")
    out_dir = os.getenv("SCK_OUT_DIR")
    verbose = os.getenv("SCK_VERBOSE")

    if threads is not None:
        cfg["threads"] = threads
    if seed is not None:
        cfg["seed"] = seed
    if n_max is not None:
        cfg["n_max"] = n_max
    if out_dir:
        cfg["out_dir"] = out_dir
    if verbose is not None:
        cfg["verbose"] = verbose == "1"

    _CONFIG = cfg
    return _CONFIG


def reset_config() -> None:
    """Drop the cached configuration (tests and long-lived callers)."""
    global _CONFIG
    _CONFIG = None
