"""Search and verification toolkit for blank-to-blank Turing machines:
machines that start on an all-blank tape and halt with the tape blank
again.  Includes a bit-exact simulator, tree-normal-form enumeration,
sound non-halting deciders, parallel class searches with champions and
reports, and a macro-step certificate for the six-state candidate."""

from .machine import (HALT, LEFT, RIGHT, MachineFormatError, Transition,
                      TransitionTable, count_raw_machines, format_machine,
                      mirror, parse_machine, permute_states)
from .sim import (Configuration, RunKind, RunResult, UndefinedTransitionError,
                  run_from, simulate, start_config, step, trace)
from .deciders import (Decision, DeciderLimits, NonHaltingProof, Reason,
                       Verdict, backward_reasoning, blank_halt_feasible,
                       cycler_check, decide, default_known_bounds,
                       escape_check, halt_reachability, known_bound_cutoff,
                       load_known_bounds)
from .tnf import (EnumerationNode, EnumStats, PartialMachine,
                  enumerate_machines, equivalent_states, expand, root_machines)
from .search import (ChampionRecord, CheckpointError, SearchConfig,
                     SearchReport, collect_flagged, emit_table, empty_report,
                     merge_reports, recheck_non_halting, resume, run_search)
from .macro import (CHAMPION_6, Certificate, CertificateError, MacroConfig,
                    MacroStep, OutOfDomainError, build_certificate,
                    closed_form_step, cross_check, expand_config,
                    format_certificate, macro_step, parse_certificate,
                    verify_certificate)

__version__ = "0.1.0"
