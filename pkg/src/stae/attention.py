"""Frame and spatial attention maps plus hard top-k selection under a budget."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tensor_core as tc
from .errors import ShapeError

FA_KEYS = ("fa/w1", "fa/b1", "fa/w2", "fa/b2")
SA_KEYS = ("sa/w", "sa/b")


@dataclass(frozen=True)
class FrameAttentionMap:
    scores: np.ndarray  # (F,), each in (0, 1)

    def __len__(self):
        return len(self.scores)


@dataclass(frozen=True)
class SpatialAttentionMap:
    maps: np.ndarray  # (alpha_k, H, W)
    source_frame_indices: tuple = ()


@dataclass(frozen=True)
class BudgetPair:
    alpha_k: int
    beta_m: float

    def check(self, n_frames, alphas=None, betas=None):
        if not 1 <= self.alpha_k <= n_frames:
            raise ShapeError(f"frame budget {self.alpha_k} outside 1..{n_frames}")
        if not 0 < self.beta_m <= 1:
            raise ShapeError(f"spatial budget {self.beta_m} outside (0, 1]")
        if alphas is not None and self.alpha_k not in alphas:
            raise ShapeError(f"frame budget {self.alpha_k} not in {sorted(alphas)}")
        if betas is not None and not any(math.isclose(self.beta_m, b) for b in betas):
            raise ShapeError(f"spatial budget {self.beta_m} not in {sorted(betas)}")
        return self


@dataclass
class SelectionResult:
    """What the encoder keeps: original frame indices, per-frame pixel masks, and payload.

    ``masks`` is a bool array ``(alpha_k, H*W)`` over row-major positions.
    ``values`` is float32, ordered frame, then channel, then position.
    """

    frame_indices: np.ndarray
    masks: np.ndarray
    values: np.ndarray
    channels: int = field(default=1)

    @property
    def alpha_k(self):
        return len(self.frame_indices)

    @property
    def k_px(self):
        return int(self.masks[0].sum()) if len(self.masks) else 0

    def validate(self):
        idx = np.asarray(self.frame_indices)
        if idx.ndim != 1 or len(idx) == 0 or np.any(np.diff(idx) <= 0):
            raise ShapeError("frame indices must be non-empty and strictly increasing")
        counts = self.masks.sum(axis=1)
        if len(self.masks) != len(idx) or np.any(counts != counts[0]):
            raise ShapeError("every frame needs a mask with the same number of set bits")
        expected = len(idx) * self.channels * int(counts[0])
        if self.values.size != expected:
            raise ShapeError(f"payload holds {self.values.size} values, masks imply {expected}")
        return self

    def __eq__(self, other):
        if not isinstance(other, SelectionResult):
            return NotImplemented
        return (
            self.channels == other.channels
            and np.array_equal(self.frame_indices, other.frame_indices)
            and np.array_equal(self.masks, other.masks)
            and self.values.dtype == other.values.dtype
            and self.values.tobytes() == other.values.tobytes()
        )


def pixel_budget(beta_m, n_pixels) -> int:
    """Number of retained positions per frame, ``floor(beta_m * H * W)``."""
    # tolerance absorbs binary representation error, e.g. 0.29 * 100
    return int(math.floor(beta_m * n_pixels + 1e-9))


def frame_attention(x, weights) -> FrameAttentionMap:
    x = tc.as_video(x)
    w1, b1, w2, b2 = (weights[k] for k in FA_KEYS)
    if w1.ndim != 2 or w1.shape[1] != x.shape[0]:
        raise ShapeError(f"frame-attention MLP expects {w1.shape[-1]} frames, clip has {x.shape[0]}")
    avg = tc.mlp_forward(tc.pool_frames(x, "avg"), w1, b1, w2, b2)
    mx = tc.mlp_forward(tc.pool_frames(x, "max"), w1, b1, w2, b2)
    return FrameAttentionMap(tc.sigmoid(avg + mx))


def _topk_ascending(scores, k):
    # stable sort on -score: equal scores keep ascending index order
    order = np.argsort(-np.asarray(scores), kind="stable")
    return np.sort(order[:k])


def select_frames(x, m_fa: FrameAttentionMap, alpha_k):
    """Keep the ``alpha_k`` highest-scoring frames in their original order."""
    x = tc.as_video(x)
    n = x.shape[0]
    if len(m_fa) != n:
        raise ShapeError(f"attention map covers {len(m_fa)} frames, clip has {n}")
    if not 1 <= alpha_k <= n:
        raise ShapeError(f"frame budget {alpha_k} outside 1..{n}")
    idx = _topk_ascending(m_fa.scores, alpha_k)
    return x[idx], idx


def spatial_attention(x_sel, weights, frame_indices=None) -> SpatialAttentionMap:
    x_sel = tc.as_video(x_sel)
    kernel, bias = weights["sa/w"], weights["sa/b"]
    if kernel.ndim != 4 or kernel.shape[:2] != (1, 2):
        raise ShapeError(f"spatial-attention kernel must be (1, 2, k, k), got {kernel.shape}")
    pooled = np.concatenate(
        [tc.pool_channels(x_sel, "avg"), tc.pool_channels(x_sel, "max")], axis=1
    )
    logits = tc.conv2d_forward(pooled, kernel, bias)
    if frame_indices is None:
        frame_indices = range(x_sel.shape[0])
    return SpatialAttentionMap(tc.sigmoid(logits[:, 0]), tuple(int(i) for i in frame_indices))


def select_pixels(x_sel, m_sa: SpatialAttentionMap, beta_m, frame_indices) -> SelectionResult:
    x_sel = tc.as_video(x_sel)
    n, c, h, w = x_sel.shape
    if m_sa.maps.shape != (n, h, w):
        raise ShapeError(f"spatial map {m_sa.maps.shape} does not match frames {(n, h, w)}")
    if not 0 < beta_m <= 1:
        raise ShapeError(f"spatial budget {beta_m} outside (0, 1]")
    k = pixel_budget(beta_m, h * w)
    if k == 0:
        raise ShapeError(f"spatial budget {beta_m} keeps no pixels at {h}x{w}")
    masks = np.zeros((n, h * w), dtype=bool)
    flat = x_sel.reshape(n, c, h * w)
    values = np.empty((n, c, k), dtype=tc.DTYPE)
    for f in range(n):
        pos = _topk_ascending(m_sa.maps[f].ravel(), k)
        masks[f, pos] = True
        values[f] = flat[f][:, pos]
    return SelectionResult(np.asarray(frame_indices, dtype=np.int64), masks, values.ravel(), c)


def encode_semantics(x, weights, alpha_k, beta_m, skip_fa_when_full=True) -> SelectionResult:
    """Full encoder path: frame attention, frame pruning, spatial attention, pixel pruning.

    With ``skip_fa_when_full`` the frame-attention pass is skipped when no frame is dropped.
    """
    x = tc.as_video(x)
    if skip_fa_when_full and alpha_k == x.shape[0]:
        x_sel, idx = x, np.arange(x.shape[0])
    else:
        x_sel, idx = select_frames(x, frame_attention(x, weights), alpha_k)
    if beta_m >= 1:
        n, c, h, w = x_sel.shape
        return SelectionResult(idx, np.ones((n, h * w), dtype=bool), x_sel.ravel().copy(), c)
    m_sa = spatial_attention(x_sel, weights, idx)
    return select_pixels(x_sel, m_sa, beta_m, idx)


def synth_attention_weights(n_frames, seed=0, kernel_size=3, scale=0.5):
    """Random frame/spatial attention parameters with hidden width ``max(1, F // 2)``."""
    rng = np.random.default_rng(seed)
    hidden = max(1, n_frames // 2)
    return {
        "fa/w1": rng.normal(0, scale, (hidden, n_frames)),
        "fa/b1": rng.normal(0, 0.1, hidden),
        "fa/w2": rng.normal(0, scale, (n_frames, hidden)),
        "fa/b2": rng.normal(0, 0.1, n_frames),
        "sa/w": rng.normal(0, scale, (1, 2, kernel_size, kernel_size)),
        "sa/b": rng.normal(0, 0.1, 1),
    }
