"""Rotation of real spherical-harmonic color bands (degrees 1-3).

Colors follow the usual splatting basis, where a direction d = (x, y, z) is
shaded as C0 * dc + sum_l Y_l(d) . k_l. Rotating an object by R must give a new
band k'_l with Y_l(d) . k'_l = Y_l(R^T d) . k_l for every d. Each band is closed
under rotation, so the (2l+1)x(2l+1) block is recovered exactly by a least
squares fit over a spread of sample directions.
"""

import numpy as np

SH_C1 = 0.4886025119029199
SH_C2 = (
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
)
SH_C3 = (
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
)

# coefficient slices of the 15 non-DC coefficients per channel
BANDS = ((0, 3), (3, 8), (8, 15))

_SAMPLES = 64


def _fibonacci_directions(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def sh_basis(dirs: np.ndarray) -> np.ndarray:
    """Evaluate the 15 non-DC basis functions at unit directions, shape (n, 15)."""
    x, y, z = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    xx, yy, zz = x * x, y * y, z * z
    return np.stack(
        [
            -SH_C1 * y,
            SH_C1 * z,
            -SH_C1 * x,
            SH_C2[0] * x * y,
            SH_C2[1] * y * z,
            SH_C2[2] * (2.0 * zz - xx - yy),
            SH_C2[3] * x * z,
            SH_C2[4] * (xx - yy),
            SH_C3[0] * y * (3.0 * xx - yy),
            SH_C3[1] * x * y * z,
            SH_C3[2] * y * (4.0 * zz - xx - yy),
            SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy),
            SH_C3[4] * x * (4.0 * zz - xx - yy),
            SH_C3[5] * z * (xx - yy),
            SH_C3[6] * x * (xx - 3.0 * yy),
        ],
        axis=1,
    )


def band_rotations(rotation: np.ndarray) -> list[np.ndarray]:
    """Per-band matrices X_l with k'_l = X_l @ k_l for a 3x3 rotation."""
    dirs = _fibonacci_directions(_SAMPLES)
    before = sh_basis(dirs)
    after = sh_basis(dirs @ rotation)  # rows are R^T d
    blocks = []
    for lo, hi in BANDS:
        x, *_ = np.linalg.lstsq(before[:, lo:hi], after[:, lo:hi], rcond=None)
        blocks.append(x)
    return blocks


def rotate_sh_rest(sh_rest: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """Rotate channel-major rest coefficients of shape (n, 45)."""
    n = len(sh_rest)
    coeffs = sh_rest.reshape(n, 3, 15)
    out = np.empty_like(coeffs)
    for (lo, hi), block in zip(BANDS, band_rotations(rotation)):
        out[:, :, lo:hi] = coeffs[:, :, lo:hi] @ block.T
    return out.reshape(n, 45)
