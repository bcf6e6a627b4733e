"""File formats of the command-line tools."""

from colorful_balancing.utils.utils import (
    attach_telemetry,
    dump_instance,
    instance_from_dict,
    instance_to_dict,
    load_bench_spec,
    load_instance,
    load_selection,
    write_report,
)

__all__ = [
    "attach_telemetry",
    "dump_instance",
    "instance_from_dict",
    "instance_to_dict",
    "load_bench_spec",
    "load_instance",
    "load_selection",
    "write_report",
]
