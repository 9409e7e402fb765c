"""Neural differential distinguisher workbench for PRESENT-80 and Simeck64/128."""

from ._core import (
    chi_square_sf,
    decide,
    distinguish,
    generate_dataset,
    present_decrypt,
    present_encrypt,
    random_differentials,
    sbox_ddt,
    selected_differentials,
    shift_family,
    simeck_decrypt,
    simeck_encrypt,
    train_distinguisher,
    write_dataset_csv,
)

__all__ = [
    "chi_square_sf",
    "decide",
    "distinguish",
    "generate_dataset",
    "present_decrypt",
    "present_encrypt",
    "random_differentials",
    "sbox_ddt",
    "selected_differentials",
    "shift_family",
    "simeck_decrypt",
    "simeck_encrypt",
    "train_distinguisher",
    "write_dataset_csv",
]
