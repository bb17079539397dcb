"""Road-network segmentation, visual feature fusion and GraphSAGE training.

Thin python surface over the C++ core. Pipeline configs are ordinary JSON
documents; helpers here accept dicts and return parsed results.
"""

import json as _json

from ._core import (
    ConfigError,
    DataError,
    DualGraph,
    NumericError,
    RasterGrid,
    RoadGraph,
    aggregate_binary,
    class_labels,
    edge_bearing,
    intensity_histogram,
    interpolate_along,
    load_graph,
    load_raster,
    micro_f1,
    resample_geometry,
    sample_patch,
    save_graph,
    segment_graph,
    to_dual,
)
from ._core import generate_synthetic as _generate_synthetic
from ._core import run_pipeline as _run_pipeline
from ._core import run_pipeline_file as _run_pipeline_file

__all__ = [
    "ConfigError",
    "DataError",
    "DualGraph",
    "NumericError",
    "RasterGrid",
    "RoadGraph",
    "aggregate_binary",
    "class_labels",
    "edge_bearing",
    "generate_synthetic",
    "intensity_histogram",
    "interpolate_along",
    "load_graph",
    "load_raster",
    "micro_f1",
    "resample_geometry",
    "run_pipeline",
    "sample_patch",
    "save_graph",
    "segment_graph",
    "to_dual",
]


def generate_synthetic(config, out_dir):
    """Write a seeded synthetic dataset (graph, rasters, labels) to out_dir."""
    return dict(_generate_synthetic(_json.dumps(config), str(out_dir)))


def run_pipeline(config):
    """Run every stage end to end; returns the results document as a dict.

    `config` may be a dict or a path to a JSON config file.
    """
    if isinstance(config, dict):
        return _json.loads(_run_pipeline(_json.dumps(config)))
    return _json.loads(_run_pipeline_file(str(config)))
