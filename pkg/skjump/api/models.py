"""
This File is intentionally left empty.
The API serves models found at:

    experiments.models
        ExperimentRun
"""
