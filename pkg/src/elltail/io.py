"""File formats: paired-sample CSV and TOML config files.

The sample format is a two-column CSV with header ``x,y``, one decimal pair
per row, UTF-8, ``.`` decimal separator.  Model and study configurations are
TOML key-value files:

    # model file
    radial = "kotz"
    beta = 1.0
    rho = 0.9
    mu_x = 0.0      # optional, default 0
    sigma_x = 1.0   # optional, default 1

    # study file adds
    n = 500
    replicates = 200
    seed = 20080401
    rho_list = [0.5, 0.9]
    p_levels = [1e-3, 1e-4, 1e-5]
"""

from __future__ import annotations

import csv

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from .errors import ConfigError
from .model import EllipticalModel, PairedSample
from .radial import FAMILIES, make_radial

_RADIAL_PARAM_KEYS = ("beta", "nu")


def load_pairs_csv(path) -> PairedSample:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["x", "y"]:
            raise ConfigError(f"{path}: expected CSV header 'x,y'")
        xs, ys = [], []
        for row in reader:
            if not row:
                continue
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise ConfigError(f"{path}: bad row {row!r}") from exc
    return PairedSample(np.array(xs), np.array(ys))


def write_pairs_csv(sample: PairedSample, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for xv, yv in zip(sample.x, sample.y):
            writer.writerow([repr(float(xv)), repr(float(yv))])


def _load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _radial_from_config(cfg: dict, path):
    name = cfg.get("radial", cfg.get("family"))
    if not isinstance(name, str) or name not in FAMILIES:
        raise ConfigError(f"{path}: 'radial' must be one of {sorted(FAMILIES)}")
    params = {k: float(cfg[k]) for k in _RADIAL_PARAM_KEYS if k in cfg}
    return make_radial(name, **params)


def load_model_config(path) -> EllipticalModel:
    cfg = _load_toml(path)
    radial = _radial_from_config(cfg, path)
    try:
        return EllipticalModel(
            mu_x=float(cfg.get("mu_x", 0.0)),
            mu_y=float(cfg.get("mu_y", 0.0)),
            sigma_x=float(cfg.get("sigma_x", 1.0)),
            sigma_y=float(cfg.get("sigma_y", 1.0)),
            rho=float(cfg.get("rho", 0.0)),
            radial=radial,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
