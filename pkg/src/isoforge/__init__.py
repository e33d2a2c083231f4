"""isoforge: isolate a unit's dependencies so white-box test generation can reach its logic."""
from .parser import SyntaxError, parse, parse_text
from .pipeline import PipelineConfig, RunReport, run_pipeline
from .printer import pretty_print
from .semantics import UnitSpec, resolve
from .syntax import Program, SourceFile
from .testgen import ExplorationConfig, explore
from .transform import isolate_unit

__version__ = "0.1.0"
