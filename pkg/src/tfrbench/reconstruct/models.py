"""Reconstructor objects wrapping the baselines behind one interface.

Per-instance kinds (``knn_interp``, ``global_interp``, ``poly``, ``gpr``,
``mlp_point``) fit on a single observation and are evaluated at every cell
center.  ``mlp_vector`` is trained once on a family of samples and maps a
monitor vector to the whole field through one network per PoI tile.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError, DimensionError, FormatError, ValidationError
from ..layout import AMBIENT, SystemSpec, grid_coordinates
from ..observation import MonitorSet, tile_pois
from .interpolation import global_interpolate, knn_interpolate
from .network import MLP, train
from .regression import fit_predict_gpr, fit_predict_poly

KINDS = ("knn_interp", "global_interp", "poly", "gpr", "mlp_point", "mlp_vector")

# model-internal temperature normalization (T - shift) / scale
TEMP_SHIFT = AMBIENT
TEMP_SCALE = 50.0


def cell_queries(spec: SystemSpec) -> np.ndarray:
    X, Y = grid_coordinates(spec.domain)
    return np.column_stack([X.ravel(), Y.ravel()])


class Reconstructor:
    kind = ""
    per_instance = True
    defaults: dict = {}

    def __init__(self, **hyper):
        unknown = set(hyper) - set(self.defaults)
        if unknown:
            raise ConfigError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        self.hyper = {**self.defaults, **hyper}

    def hyperparameters(self) -> dict:
        return dict(self.hyper)

    def normalization(self) -> dict:
        return {"shift": TEMP_SHIFT, "scale": TEMP_SCALE}

    def check(self, n_monitors: int) -> None:
        """Validate hyperparameters against the monitor count before any work."""

    def predict_points(self, obs, monitors: MonitorSet, queries, side_length: float):
        raise NotImplementedError

    def predict_field(self, obs, monitors: MonitorSet, spec: SystemSpec) -> np.ndarray:
        n = spec.domain.grid_n
        vals = self.predict_points(obs, monitors, cell_queries(spec), spec.domain.side_length)
        return np.asarray(vals, dtype=float).reshape(n, n)


class KNNInterpolation(Reconstructor):
    kind = "knn_interp"
    defaults = {"k": 3, "length_scale": 0.1}

    def check(self, n_monitors):
        if not 1 <= self.hyper["k"] <= n_monitors:
            raise ConfigError(f"knn_interp: k={self.hyper['k']} outside [1, {n_monitors}]")

    def predict_points(self, obs, monitors, queries, side_length):
        return knn_interpolate(obs, monitors, queries, k=self.hyper["k"],
                               length_scale=self.hyper["length_scale"], side_length=side_length)


class GlobalInterpolation(Reconstructor):
    kind = "global_interp"
    defaults = {"length_scale": 0.1}

    def predict_points(self, obs, monitors, queries, side_length):
        return global_interpolate(obs, monitors, queries,
                                  length_scale=self.hyper["length_scale"], side_length=side_length)


class PolynomialRegression(Reconstructor):
    kind = "poly"
    defaults = {"degree": 5}

    def predict_points(self, obs, monitors, queries, side_length):
        return fit_predict_poly(obs, monitors, queries, degree=self.hyper["degree"],
                                side_length=side_length)


class GaussianProcess(Reconstructor):
    kind = "gpr"
    defaults = {"length_scale": 0.2, "jitter": 1e-8}

    def predict_points(self, obs, monitors, queries, side_length):
        return fit_predict_gpr(obs, monitors, queries, length_scale=self.hyper["length_scale"],
                               jitter=self.hyper["jitter"], side_length=side_length)


@dataclass
class PointMLPFit:
    net: MLP
    history: np.ndarray
    side_length: float

    def predict(self, queries) -> np.ndarray:
        x = 2.0 * np.atleast_2d(np.asarray(queries, dtype=float)) / self.side_length - 1.0
        return self.net(x)[:, 0] * TEMP_SCALE + TEMP_SHIFT


def train_mlp_point(obs, monitors: MonitorSet, *, hidden=(100, 50), activation="tanh",
                    lr=0.1, epochs=3000, seed=0, side_length=0.1) -> PointMLPFit:
    """Fit ``(x, y) -> T`` on the monitors with full-batch gradient descent on MSE."""
    obs = np.asarray(obs, dtype=float)
    if len(monitors) == 0:
        raise ValidationError("mlp_point needs at least one monitor")
    x = 2.0 * monitors.coords / side_length - 1.0
    y = ((obs - TEMP_SHIFT) / TEMP_SCALE)[:, None]
    net = MLP((2, *hidden, 1), activation=activation, rng=seed, zero_output=True)
    history = train(net, x, y, loss="mse", optimizer="gd", lr=lr, epochs=epochs)
    return PointMLPFit(net, history, side_length)


class PointMLP(Reconstructor):
    kind = "mlp_point"
    defaults = {"hidden": [100, 50], "activation": "tanh", "lr": 0.1, "epochs": 3000, "seed": 0}

    def predict_points(self, obs, monitors, queries, side_length):
        h = self.hyper
        fit = train_mlp_point(obs, monitors, hidden=tuple(h["hidden"]), activation=h["activation"],
                              lr=h["lr"], epochs=h["epochs"], seed=h["seed"],
                              side_length=side_length)
        return fit.predict(queries)


@dataclass
class TrainSetView:
    """Paired monitor readings and full fields for family-trained models."""

    observations: np.ndarray  # (S, M)
    fields: np.ndarray        # (S, N, N)

    def __post_init__(self):
        self.observations = np.atleast_2d(np.asarray(self.observations, dtype=float))
        self.fields = np.asarray(self.fields, dtype=float)
        if self.fields.ndim == 2:
            self.fields = self.fields[None]
        s = self.observations.shape[0]
        if s == 0:
            raise ValidationError("training set is empty")
        if self.fields.shape[0] != s or self.fields.shape[1] != self.fields.shape[2]:
            raise DimensionError(
                f"{s} observations vs fields of shape {self.fields.shape}")


class VectorMLP(Reconstructor):
    """One ``M -> hidden -> tile**2`` network per PoI tile, trained on MAE with Adam."""

    kind = "mlp_vector"
    per_instance = False
    defaults = {"hidden": [512, 512, 512], "activation": "relu", "lr": 1e-3,
                "epochs": 200, "tile": 50, "seed": 0}

    def __init__(self, **hyper):
        super().__init__(**hyper)
        self.nets: Optional[list[MLP]] = None
        self.history: Optional[np.ndarray] = None
        self.n: Optional[int] = None
        self.n_monitors: Optional[int] = None

    def fit(self, train_set: TrainSetView) -> "VectorMLP":
        h = self.hyper
        n = train_set.fields.shape[1]
        tiles = tile_pois(n, h["tile"])
        x = (train_set.observations - TEMP_SHIFT) / TEMP_SCALE
        flat = (train_set.fields.reshape(len(x), -1) - TEMP_SHIFT) / TEMP_SCALE
        nets, hist = [], []
        for t, idx in enumerate(tiles):
            rng = np.random.default_rng([int(h["seed"]), t])
            net = MLP((x.shape[1], *h["hidden"], idx.size), activation=h["activation"], rng=rng)
            hist.append(train(net, x, flat[:, idx], loss="mae", optimizer="adam", lr=h["lr"],
                              epochs=h["epochs"], schedule="cosine"))
            nets.append(net)
        self.nets, self.n, self.n_monitors = nets, n, x.shape[1]
        self.history = np.mean(hist, axis=0) * TEMP_SCALE  # Kelvin MAE per epoch
        return self

    def predict_batch(self, observations) -> np.ndarray:
        if self.nets is None:
            raise ValidationError("mlp_vector must be fitted before prediction")
        obs = np.atleast_2d(np.asarray(observations, dtype=float))
        if obs.shape[1] != self.n_monitors:
            raise DimensionError(f"model expects {self.n_monitors} monitors, got {obs.shape[1]}")
        x = (obs - TEMP_SHIFT) / TEMP_SCALE
        out = np.empty((obs.shape[0], self.n * self.n))
        for net, idx in zip(self.nets, tile_pois(self.n, self.hyper["tile"])):
            out[:, idx] = net(x)
        return (out * TEMP_SCALE + TEMP_SHIFT).reshape(-1, self.n, self.n)

    def predict_field(self, obs, monitors=None, spec=None) -> np.ndarray:
        return self.predict_batch(obs)[0]

    def save(self, path) -> None:
        save_weights(path, self)

    @classmethod
    def load(cls, path) -> "VectorMLP":
        return load_weights(path)


def train_mlp_vector(train_set: TrainSetView, tile: int = 50, seed: int = 0, **hyper) -> VectorMLP:
    return VectorMLP(tile=tile, seed=seed, **hyper).fit(train_set)


_REGISTRY = {cls.kind: cls for cls in (KNNInterpolation, GlobalInterpolation, PolynomialRegression,
                                       GaussianProcess, PointMLP, VectorMLP)}


def make_reconstructor(kind: str, **hyper) -> Reconstructor:
    try:
        cls = _REGISTRY[kind]
    except KeyError:
        raise ConfigError(f"unknown reconstructor kind {kind!r}; choose from {KINDS}") from None
    return cls(**hyper)


def reconstruct_field(model: Reconstructor, obs, monitors: MonitorSet, spec: SystemSpec) -> np.ndarray:
    """Full ``N x N`` prediction; per-instance kinds fit on ``obs`` first."""
    return model.predict_field(obs, monitors, spec)


# Weight file (little-endian):
#   b"TFRW", u32 version, u32 N, u32 tile, u32 M, u32 n_nets, u32 activation (0 tanh, 1 relu),
#   f64 temperature shift, f64 temperature scale,
#   per net: u32 n_layers, then per layer u32 fan_in, u32 fan_out,
#            fan_in*fan_out f64 weights (row-major, fan_in major), fan_out f64 biases
_W_MAGIC = b"TFRW"
_W_VERSION = 1
_W_HEAD = struct.Struct("<4sIIIIIIdd")
_ACT_CODES = {"tanh": 0, "relu": 1}


def save_weights(path, model: VectorMLP) -> None:
    if model.nets is None:
        raise ValidationError("cannot save an unfitted model")
    parts = [_W_HEAD.pack(_W_MAGIC, _W_VERSION, model.n, model.hyper["tile"], model.n_monitors,
                          len(model.nets), _ACT_CODES[model.hyper["activation"]],
                          TEMP_SHIFT, TEMP_SCALE)]
    for net in model.nets:
        parts.append(struct.pack("<I", len(net.W)))
        for W, b in zip(net.W, net.b):
            parts.append(struct.pack("<II", *W.shape))
            parts.append(W.astype("<f8").tobytes(order="C"))
            parts.append(b.astype("<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_weights(path) -> VectorMLP:
    raw = Path(path).read_bytes()
    if len(raw) < _W_HEAD.size:
        raise FormatError(f"{path}: truncated weight file")
    magic, version, n, tile, m, n_nets, act, shift, scale = _W_HEAD.unpack_from(raw)
    if magic != _W_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != _W_VERSION:
        raise FormatError(f"{path}: unsupported TFRW version {version}")
    if (shift, scale) != (TEMP_SHIFT, TEMP_SCALE):
        raise FormatError(f"{path}: normalization ({shift}, {scale}) not supported")
    activation = {v: k for k, v in _ACT_CODES.items()}[act]
    pos = _W_HEAD.size
    nets = []
    try:
        for _ in range(n_nets):
            (n_layers,) = struct.unpack_from("<I", raw, pos)
            pos += 4
            layers = []
            for _ in range(n_layers):
                fi, fo = struct.unpack_from("<II", raw, pos)
                pos += 8
                W = np.frombuffer(raw, "<f8", fi * fo, pos).reshape(fi, fo).astype(float)
                pos += 8 * fi * fo
                b = np.frombuffer(raw, "<f8", fo, pos).astype(float)
                pos += 8 * fo
                layers.append((W, b))
            sizes = [layers[0][0].shape[0]] + [w.shape[1] for w, _ in layers]
            nets.append(MLP(sizes, activation=activation, weights=layers))
    except (struct.error, ValueError) as exc:
        raise FormatError(f"{path}: corrupt weight file ({exc})") from None
    if pos != len(raw):
        raise FormatError(f"{path}: {len(raw) - pos} trailing bytes")
    hidden = [w.shape[1] for w in nets[0].W[:-1]] if nets else []
    model = VectorMLP(hidden=hidden, activation=activation, tile=tile)
    model.nets, model.n, model.n_monitors = nets, n, m
    return model
