"""Joint denoising and super-resolution toolkit.

Images are float32 numpy arrays of shape (H, W, 3) with values in [0, 1].
"""

from ._core import (
    ConfigError,
    Dae,
    SrNetwork,
    bicubic_downsample,
    bicubic_resize,
    bicubic_upsample,
    config_hash,
    corrupt,
    generate_corpus,
    load_png,
    median_filter,
    mse,
    psnr,
    save_png,
    wiener_filter,
)

__all__ = [
    "ConfigError",
    "Dae",
    "SrNetwork",
    "bicubic_downsample",
    "bicubic_resize",
    "bicubic_upsample",
    "config_hash",
    "corrupt",
    "generate_corpus",
    "load_png",
    "median_filter",
    "mse",
    "psnr",
    "save_png",
    "wiener_filter",
]
