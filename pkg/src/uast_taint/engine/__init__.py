"""Value domain, analysis state and the abstract interpreter."""

from .config import AnalysisConfig, ConfigError, load_config
from .values import CLEAN, Obj, Phi, Prim, Sym, Taint, TraceStep

__all__ = ["AnalysisConfig", "CLEAN", "ConfigError", "Obj", "Phi", "Prim", "Sym", "Taint", "TraceStep", "load_config"]
