"""Hybrid binary classifier: dense front-end -> quantum layer -> sigmoid head.

Forward path for an image x (flattened, values in [0, 1]):

    z = W_f x + b_f                   (front-end, n_qubits outputs)
    e = <Z_0> of the ansatz on (z, theta)
    p = sigmoid(w_h e + b_h)

The front-end output feeds the encoding rotations directly, with no
squashing in between: the rotations are 2*pi-periodic, so unbounded
angles wrap instead of saturating. (A bounded pi*tanh(z) encoding was
tried first and systematically erased the backdoor: once the clean task
grows |z|, 1 - tanh^2(z) vanishes and the trigger's additive shift in z
can no longer move the circuit.)

All trainable pieces (front-end, circuit angles theta, head) update
together from the mean batch gradient. Training is deterministic given
the seed and the sample order.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, QuantumLayer
from .nn import (
    Adam,
    DenseLayer,
    bce_loss,
    dense_backward,
    dense_forward,
    sigmoid_forward,
)
from .sim.gates import Observable

CHECKPOINT_MAGIC = b"QNNW"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIIqIQQ")
_OBS_KINDS = ("z", "parity")


class CheckpointError(ValueError):
    """Checkpoint file is malformed or incompatible."""


@dataclass
class CheckpointMeta:
    seed: int = 0
    epochs: int = 0
    schedule_hash: int = 0


class HybridModel:
    def __init__(
        self,
        input_dim: int,
        spec: AnsatzSpec,
        front: DenseLayer,
        theta: np.ndarray,
        head: DenseLayer,
    ):
        self.input_dim = input_dim
        self.spec = spec
        self.front = front
        self.theta = np.asarray(theta, dtype=np.float64)
        self.head = head
        self.qlayer = QuantumLayer(spec)
        expected = input_dim * spec.n_qubits + spec.n_qubits + spec.n_trainable + 2
        actual = sum(p.size for p in self.parameters())
        if actual != expected:
            raise ValueError(
                f"parameter count {actual} does not match layout {expected}"
            )

    @classmethod
    def initialize(cls, input_dim: int, spec: AnsatzSpec, seed: int) -> "HybridModel":
        rng = np.random.default_rng(seed)
        front = DenseLayer.initialize(input_dim, spec.n_qubits, rng)
        theta = rng.uniform(-1.0, 1.0, size=spec.n_trainable)
        head = DenseLayer.initialize(1, 1, rng)
        return cls(input_dim, spec, front, theta, head)

    def parameters(self) -> list[np.ndarray]:
        """Trainable arrays in checkpoint order."""
        return [self.front.weights, self.front.bias, self.theta,
                self.head.weights, self.head.bias]

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def _forward(self, image: np.ndarray):
        image = np.asarray(image, dtype=np.float64)
        if image.shape != (self.input_dim,):
            raise ValueError(
                f"image must have shape ({self.input_dim},), got {image.shape}"
            )
        angles = dense_forward(self.front, image)
        return image, angles

    def predict_proba(self, image) -> float:
        _, angles = self._forward(image)
        e = self.qlayer.forward(angles, self.theta)
        u = dense_forward(self.head, np.array([e]))[0]
        return float(sigmoid_forward(u))

    def predict_label(self, image) -> int:
        # ties go to 1
        return 1 if self.predict_proba(image) >= 0.5 else 0

    def _loss_and_gradients(self, image, label: int):
        """Per-sample BCE loss and gradients in parameters() order."""
        x, angles = self._forward(image)
        qout = self.qlayer.backward(angles, self.theta)
        e = np.array([qout.value])
        u = dense_forward(self.head, e)[0]
        p = float(sigmoid_forward(u))
        loss, _ = bce_loss(p, label)
        # d(BCE(sigmoid(u)))/du collapses to p - y
        du = np.array([p - label])
        de, d_head_w, d_head_b = dense_backward(self.head, e, du)
        d_theta = de[0] * qout.grad_params
        d_angles = de[0] * qout.grad_inputs
        _, d_front_w, d_front_b = dense_backward(self.front, x, d_angles)
        return loss, [d_front_w, d_front_b, d_theta, d_head_w, d_head_b]


def train_step(model: HybridModel, optimizer: Adam, batch) -> float:
    """One optimizer update from the mean gradient of a batch; returns mean loss."""
    batch = list(batch)
    if not batch:
        raise ValueError("batch must be non-empty")
    total_loss = 0.0
    acc = [np.zeros_like(p) for p in model.parameters()]
    for image, label in batch:
        loss, grads = model._loss_and_gradients(image, label)
        total_loss += loss
        for a, g in zip(acc, grads):
            a += g
    scale = 1.0 / len(batch)
    for a in acc:
        a *= scale
    optimizer.step(model.parameters(), acc)
    return total_loss * scale


def _observable_codes(obs: Observable) -> tuple[int, int]:
    kind = _OBS_KINDS.index(obs.kind)
    qubit = obs.qubit if obs.qubit is not None else 0xFFFFFFFF
    return kind, qubit


def save_checkpoint(model: HybridModel, path, meta: CheckpointMeta | None = None) -> None:
    """Binary checkpoint: magic, version, dimension header, f64 payload, crc32."""
    meta = meta or CheckpointMeta()
    payload = np.concatenate([p.ravel(order="C") for p in model.parameters()])
    payload_bytes = payload.astype("<f8").tobytes()
    kind, qubit = _observable_codes(model.spec.observable)
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        model.input_dim,
        model.spec.n_qubits,
        model.spec.reps,
        kind,
        qubit,
        meta.seed,
        meta.epochs,
        meta.schedule_hash,
        payload.size,
    )
    crc = zlib.crc32(payload_bytes) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload_bytes)
        fh.write(struct.pack("<I", crc))


def load_checkpoint(path) -> tuple[HybridModel, CheckpointMeta]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size + 4:
        raise CheckpointError("file too short to hold a checkpoint header")
    (
        magic,
        version,
        input_dim,
        n_qubits,
        reps,
        obs_kind,
        obs_qubit,
        seed,
        epochs,
        schedule_hash,
        n_params,
    ) = _HEADER.unpack_from(blob, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
        )
    if obs_kind >= len(_OBS_KINDS) or input_dim < 1 or n_qubits < 1 or reps < 1:
        raise CheckpointError("corrupt dimension header")
    expected_params = input_dim * n_qubits + n_qubits + reps * n_qubits + 2
    if n_params != expected_params:
        raise CheckpointError(
            f"dimension mismatch: header declares {n_params} parameters, "
            f"layout requires {expected_params}"
        )
    body = blob[_HEADER.size : _HEADER.size + 8 * n_params]
    if len(body) != 8 * n_params or len(blob) != _HEADER.size + 8 * n_params + 4:
        raise CheckpointError("truncated or oversized parameter payload")
    (crc,) = struct.unpack_from("<I", blob, _HEADER.size + 8 * n_params)
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise CheckpointError("payload checksum mismatch")

    payload = np.frombuffer(body, dtype="<f8").astype(np.float64)
    obs = (
        Observable.single_z(obs_qubit)
        if _OBS_KINDS[obs_kind] == "z"
        else Observable.parity()
    )
    spec = AnsatzSpec(n_qubits=n_qubits, reps=reps, observable=obs)
    sizes = [input_dim * n_qubits, n_qubits, reps * n_qubits, 1, 1]
    parts = []
    offset = 0
    for size in sizes:
        parts.append(payload[offset : offset + size].copy())
        offset += size
    model = HybridModel(
        input_dim,
        spec,
        DenseLayer(parts[0].reshape(n_qubits, input_dim), parts[1]),
        parts[2],
        DenseLayer(parts[3].reshape(1, 1), parts[4]),
    )
    return model, CheckpointMeta(seed=seed, epochs=epochs, schedule_hash=schedule_hash)
