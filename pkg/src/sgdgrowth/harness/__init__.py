from .config import ExperimentConfig, ProblemSpec, StepSpec, read_problem, write_problem
from .csvio import emit_csv, read_csv
from .experiment import ExperimentReport, run_experiment
