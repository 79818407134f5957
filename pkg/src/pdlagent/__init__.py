"""PDL workflow engine: parser, controller-guarded agent runtime, evaluation."""

__version__ = "0.1.0"
