"""joinmatch: actors reacting to guarded combinations of messages.

Join patterns match sets of mailbox messages under a deterministic fair
policy: among all guard-satisfying combinations, the one consuming the oldest
messages fires. Five interchangeable engines implement the same semantics,
checked against a brute-force oracle.
"""

from .core import (
    CONTINUE,
    DISCONNECTED,
    ArrivalCounter,
    CandidateMatch,
    Continue,
    Disconnected,
    DuplicateBinding,
    EmptyPatternList,
    InvalidFilter,
    JoinError,
    JoinPattern,
    LookupEnv,
    Message,
    MessageInstance,
    MissingMessage,
    ResultControl,
    SlotDescriptor,
    Stop,
    assemble_env,
    build_pattern,
    candidate,
    compare_matches,
    fairness_key,
    slot,
    slot_fits,
    stamp,
)
from .kernel import (
    FACTORY_IDENTIFIERS,
    BruteForceMatcher,
    FiredMatch,
    Matcher,
    MatcherFactory,
    MatchProbe,
    all_factories,
    brute_force_ingest,
    factory_instantiate,
    matcher_factory,
    replay_fire_sequence,
)
from .oracle import (
    Arrive,
    Fire,
    MessageBuffer,
    TraceEvent,
    differential_replay,
    enumerate_matches,
    fairest_match,
    format_fire,
    format_fire_log,
    oracle_fire_sequence,
    parse_trace,
)
from .parallel import (
    CancellationToken,
    FilteringParallelMatcher,
    LazyParallelMatcher,
    Partition,
    admit_message,
    parallel_lazy_match,
    partition_nodes,
    resolve_workers,
    validate_filter,
)
from .runtime import (
    Actor,
    ActorClosed,
    ActorRef,
    CompletionHandle,
    Mailbox,
    SimpleActor,
    simple_actor_step,
    spawn_actor,
    spawn_simple_actor,
)
from .tree import (
    MatchingTree,
    StatefulTreeMatcher,
    WhileLazyMatcher,
    dump_tree,
    lazy_ramify,
    prune_on_fire,
    ramify,
    traverse_fairest,
)

__version__ = "0.1.0"
