"""Plant telemetry service with a sensor wire endpoint, mood engine, and
LLM plant-persona chat."""

__version__ = "0.1.0"
