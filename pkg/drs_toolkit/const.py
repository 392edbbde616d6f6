"""Constants for the DRS toolkit."""

# Domain and basic info
DOMAIN = "drs_toolkit"
NAME = "DRS Toolkit"
VERSION = "1.0.0"

# Environment variables override defaults, CLI flags override both
ENV_PREFIX = "DRS_TOOLKIT_"

# Configuration keys
CONF_OPERATORS = "operators"
CONF_RELATIONS = "relations"
CONF_SEED = "seed"
CONF_RESTARTS = "restarts"
CONF_MASK_RATE = "mask_rate"
CONF_JOBS = "jobs"
CONF_LANGUAGES = "languages"
CONF_INVENTORY = "inventory"
CONF_STRICT_SCOPE = "strict_scope"

# Manifest keys
MANIFEST_FILE = "manifest.json"
MANIFEST_RELEASE = "release"
MANIFEST_LANGUAGES = "languages"
MANIFEST_COUNTS = "counts"

# Default symbol inventory
DEFAULT_OPERATORS = (
    "EQU",
    "NEQ",
    "APX",
    "LES",
    "LEQ",
    "TPR",
    "TAB",
    "TIN",
    "SZP",
    "SZN",
)
DEFAULT_DISCOURSE_RELATIONS = (
    "NEGATION",
    "POSSIBILITY",
    "NECESSITY",
    "NARRATION",
    "CONTINUATION",
    "CONTRAST",
    "RESULT",
    "EXPLANATION",
    "BACKGROUND",
    "COMMENTARY",
    "PARALLEL",
    "CONSEQUENCE",
    "CONDITION",
    "ALTERNATION",
    "ATTRIBUTION",
    "SOURCE",
    "ELABORATION",
)
DEICTIC_CONSTANTS = ("speaker", "hearer", "now")
PARTS_OF_SPEECH = ("n", "v", "a", "r")

# Graph labels
CONTEXT_LABEL = "box"
MEMBERSHIP_LABEL = "member"
ROOT_CONTEXT_ID = "b0"
CONTEXT_PREFIX = "b"
ENTITY_PREFIX = "e"
CONSTANT_PREFIX = "c"

# Smatch defaults
DEFAULT_RESTARTS = 4
DEFAULT_SEED = 0
ORACLE_MAX_VARIABLES = 8

# Corpus layout
LANGUAGES = ("en", "de", "it", "nl")
PIVOT_LANGUAGE = "en"
TIER_GOLD = "gold"
TIER_SILVER = "silver"
TIER_BRONZE = "bronze"
TIERS = (TIER_GOLD, TIER_SILVER, TIER_BRONZE)
SPLIT_TRAIN = "train"
SPLIT_DEV = "dev"
SPLIT_TEST = "test"
SPLITS = (SPLIT_TRAIN, SPLIT_DEV, SPLIT_TEST)
TEXT_SUFFIX = ".txt"
DRS_SUFFIX = ".drs"
IDS_SUFFIX = ".ids"

# Training stages
STAGE_PT = "PT"
STAGE_FFT = "FFT"
STAGE_SFT = "SFT"
STAGE_TIERS = {
    STAGE_PT: TIERS,
    STAGE_FFT: TIERS,
    STAGE_SFT: (TIER_GOLD, TIER_SILVER),
}
DEFAULT_POOL_TIERS = (TIER_GOLD, TIER_SILVER)

# Training pair stages
PAIR_BPT = "BPT"
PAIR_SPT_MONO = "SPT-mono"
PAIR_SPT_CROSS = "SPT-cross"
PAIR_FT_PARSE = "FT-parse"
PAIR_FT_GENERATE = "FT-generate"
PAIR_FT_BOTH = "FT-both"

TASK_PARSE = "parse"
TASK_GENERATE = "generate"
TASK_BOTH = "both"

# Cross-lingual DRS-side directions
CROSS_DRS_BOTH = "both"
CROSS_DRS_PIVOT_CONTEXT = "pivot-context"
CROSS_DRS_TARGET_CONTEXT = "target-context"
CROSS_DRS_NONE = "none"

# Special tokens
DRS_PREFIX = "<drs>"
SEP_TOKEN = "<sep>"
DEFAULT_MASK_TOKEN = "<mask>"
DEFAULT_MASK_RATE = 0.35
DEFAULT_SPAN_LAMBDA = 3.5
LANGUAGE_PREFIXES = {lang: f"<{lang}>" for lang in LANGUAGES}
PREFIX_TOKENS = frozenset((DRS_PREFIX, *LANGUAGE_PREFIXES.values()))

# Text metrics
BLEU_MAX_ORDER = 4
DEFAULT_ANNOTATION_SAMPLE = 100

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

# Errors
ERROR_EMPTY_LINE = "Line contains no tokens"
ERROR_INVALID_TOKEN = "Token matches no lexical class"
ERROR_EMPTY_INPUT = "Input list is empty"
ERROR_INVENTORY_OVERLAP = "Operators and discourse relations must be disjoint"
ERROR_INVENTORY_CASE = "Inventory names must be uppercase"
ERROR_MISALIGNED = "Line counts differ between paired files"
ERROR_ORACLE_BOUND = "Instance exceeds the exhaustive oracle bound"
ERROR_ZERO_VARIANCE = "Metric values have zero variance"
ERROR_DEGENERATE_GROUPS = "Both label classes must be present"
