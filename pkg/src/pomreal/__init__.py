"""Realisability and termination checks for choreographies given as families of pomsets."""

from __future__ import annotations

__version__ = "0.1.0"

from .cfsm import (CFSM, CommSystem, Configuration, ConfigurationGraph, check_system_termination_aware,
                   initial_configuration, reachable, step, successors, synthesize_cfsm, synthesize_system,
                   system_language)
from .closure import ClosureResult, ClosureWitness, check_ccp2, check_ccp3, inter_participant_closure
from .errors import (AmbiguousMatch, BoundExceeded, CycleError, DanglingEdge, DuplicateId, EmptyBuffer,
                     IntegrityError, NoTransition, ParseError, PomrealError, SubjectMismatch, UnsupportedFormat,
                     ValidationError)
from .language import (Language, check_cc2, check_cc3, check_language_terminating, count_linear_extensions,
                       count_preceding, feasible_words, format_word, language, linearizations, parse_word,
                       project_word, word_complete, word_well_formed)
from .pomset import (CommLabel, Direction, Matching, Pomset, PomsetFamily, concurrently_repeats, hasse,
                     is_complete, is_msc, is_prefix, is_well_formed, lab, less_permissive, matching_of, prefixes,
                     project, validate_pomset)
from .specio import SpecDocument, load_fixture, parse_spec
from .termination import TerminationWitness, check_pomset_terminating, termination_unaware
from .verdict import Verdict
