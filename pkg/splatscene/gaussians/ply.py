"""Binary little-endian PLY codec for splat clouds.

Vertex properties are float32, in the order used by splatting tools:
x y z nx ny nz f_dc_0..2 f_rest_0..44 opacity scale_0..2 rot_0..3.
Scales are stored as natural logs, opacity as a logit and rot_* as an
unnormalized (w, x, y, z) quaternion.
"""

import io
import logging

import numpy as np
from plyfile import PlyData, PlyElement, PlyElementParseError
from scipy.special import expit, logit

from splatscene.errors import PlyEncodeError, PlyFormatError
from splatscene.gaussians.cloud import SH_REST, GaussianCloud
from splatscene.models import UNIT_TOLERANCE

log = logging.getLogger(__name__)

PROPERTY_NAMES: tuple[str, ...] = (
    "x", "y", "z",
    "nx", "ny", "nz",
    "f_dc_0", "f_dc_1", "f_dc_2",
    *(f"f_rest_{i}" for i in range(SH_REST)),
    "opacity",
    "scale_0", "scale_1", "scale_2",
    "rot_0", "rot_1", "rot_2", "rot_3",
)  # fmt: skip

VERTEX_DTYPE = np.dtype([(name, "<f4") for name in PROPERTY_NAMES])

# loaded opacities stay inside the open interval (0, 1)
OPACITY_RANGE = (float(np.nextafter(0.0, 1.0)), float(np.nextafter(1.0, 0.0)))


def _column(data: np.ndarray, names: list[str]) -> np.ndarray:
    return np.stack([data[n].astype(np.float64) for n in names], axis=1)


def load_ply(data: bytes, label: str = "") -> GaussianCloud:
    """Decode a splat PLY payload into a cloud."""
    try:
        ply = PlyData.read(io.BytesIO(data))
    except PlyElementParseError as e:
        prop = getattr(e, "prop", None)
        field = getattr(prop, "name", None) or getattr(e.element, "name", None) or "vertex"
        raise PlyFormatError(e.message, field=field) from e
    except Exception as e:
        raise PlyFormatError(str(e) or type(e).__name__, field="header") from e

    try:
        vertex = ply["vertex"]
    except KeyError:
        raise PlyFormatError("missing element", field="vertex") from None

    present = {p.name for p in vertex.properties}
    for name in PROPERTY_NAMES:
        if name not in present:
            raise PlyFormatError("missing required property", field=name)

    v = vertex.data
    n = len(v)
    if n == 0:
        return GaussianCloud.empty(label)

    rotations = _column(v, ["rot_0", "rot_1", "rot_2", "rot_3"])
    norms = np.linalg.norm(rotations, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise PlyFormatError("zero or non-finite quaternion", field="rot_0")
    drift = np.abs(norms - 1.0) > UNIT_TOLERANCE
    rotations[drift] /= norms[drift, None]

    try:
        return GaussianCloud(
            means=_column(v, ["x", "y", "z"]),
            normals=_column(v, ["nx", "ny", "nz"]),
            sh_dc=_column(v, [f"f_dc_{i}" for i in range(3)]),
            sh_rest=_column(v, [f"f_rest_{i}" for i in range(SH_REST)]),
            opacities=np.clip(expit(v["opacity"].astype(np.float64)), *OPACITY_RANGE),
            scales=np.exp(_column(v, ["scale_0", "scale_1", "scale_2"])),
            rotations=rotations,
            label=label,
        )
    except ValueError as e:
        raise PlyFormatError(str(e), field="vertex") from e


def save_ply(cloud: GaussianCloud) -> bytes:
    """Encode a cloud; the inverse of :func:`load_ply`."""
    if len(cloud):
        bad = np.argwhere(cloud.scales <= 0)
        if len(bad):
            i, axis = bad[0]
            raise PlyEncodeError("scale must be > 0", field=f"scale_{axis}", index=int(i))
        bad_op = np.flatnonzero((cloud.opacities <= 0) | (cloud.opacities >= 1))
        if len(bad_op):
            i = int(bad_op[0])
            raise PlyEncodeError(
                f"opacity {cloud.opacities[i]} has no logit", field="opacity", index=i
            )

    arr = np.empty(len(cloud), dtype=VERTEX_DTYPE)
    groups = {
        ("x", "y", "z"): cloud.means,
        ("nx", "ny", "nz"): cloud.normals,
        tuple(f"f_dc_{i}" for i in range(3)): cloud.sh_dc,
        tuple(f"f_rest_{i}" for i in range(SH_REST)): cloud.sh_rest,
        ("scale_0", "scale_1", "scale_2"): np.log(cloud.scales),
        ("rot_0", "rot_1", "rot_2", "rot_3"): cloud.rotations,
    }
    for names, values in groups.items():
        for j, name in enumerate(names):
            arr[name] = values[:, j]
    arr["opacity"] = logit(cloud.opacities)

    buf = io.BytesIO()
    PlyData([PlyElement.describe(arr, "vertex")], text=False, byte_order="<").write(buf)
    log.debug("Encoded %d Gaussians (%s)", len(cloud), cloud.label or "unlabeled")
    return buf.getvalue()
