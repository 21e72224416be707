"""Software defect prediction with hybrid resampling and fused multi-objective feature selection."""

__version__ = "0.1.0"
