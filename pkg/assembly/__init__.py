"""Assembly Folder

The assembly folder ties the lab together. A single ExperimentConfig describes the
field, the slope and every solver setting, the subcommands turn it into CSV and JSON
artifacts, and the validation suite runs each invariant as a named check.

ExperimentConfig (Class): JSON experiment description with flag overrides
RunManifest (Class): PASS, FAIL and SKIP verdicts of a validation run
"""
