"""Run analysis and report rendering."""

from .analysis import INSUFFICIENT_GROUPS, MissingData, ReportBundle, analyze_run, write_bundle
from .plots import render_figures
