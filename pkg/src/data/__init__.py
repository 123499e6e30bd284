"""Data Package."""

from .ingest import AlignedTable, Dataset, PriceRecord, align, build_panel, load_csv, write_csv

__all__ = [
    "AlignedTable",
    "Dataset",
    "PriceRecord",
    "align",
    "build_panel",
    "load_csv",
    "write_csv",
]
