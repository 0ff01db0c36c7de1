"""Constants used throughout the Smart Home Activity Learner"""

# Logging
LOGGER_NAME = "shal"
LOG_FORMAT = "[SHAL %(levelname)s] %(message)s"

# Mining defaults
DEFAULT_RHO = 0.9
DEFAULT_MINSUP = 0.03
DEFAULT_MIN_PRE = 0.5
DEFAULT_SMOOTHING = 0.01
DEFAULT_EMISSION_FLOOR = 1e-3
DEFAULT_SEGMENT_GAP = 300.0  # seconds
DEFAULT_PREDICT_WINDOW = 12  # slots
DEFAULT_DB_WINDOW_DAYS = 1
DEFAULT_TIME_BASIS = "absolute"

# Synthetic corpus defaults
DEFAULT_SEED = 7
DEFAULT_OPTIONAL_RATE = 0.5
DEFAULT_START_DATE = "2003-05-03"
SECONDS_PER_DAY = 86400

# Numerical tolerances
ROW_SUM_TOLERANCE = 1e-9

# File formats
BUNDLE_SCHEMA_VERSION = 1
PATTERNS_SCHEMA_VERSION = 1
CLUSTERS_SCHEMA_VERSION = 1
EVENT_LOG_COLUMNS = ("timestamp", "sensor_id", "event_type", "location")
MANIFEST_SUFFIX = ".manifest.json"

# Timing
TIMING_REPEATS = 3  # median of this many runs
