# constants.py  (fixed numbers shared by every module)

from pathlib import Path
PROJECT_ROOT = Path(__file__).resolve().parent.parent   # …/mici-fusion

MAX_SOURCES  = 16        # dense 2^m − 1 array stays at 65,535 elements
LOG_FLOOR    = 1e-12     # floor on log arguments and |CI − 1| deviations
SELECT_EPS   = 1e-9      # keeps the worst pooled measure selectable

# synthetic experiments
CONTAMINATION_BAGS      = 100
CONTAMINATION_BAG_SIZE  = 10
REGRESSION_BAGS         = 10
REGRESSION_BAG_SIZE     = 100
SYNTH_SOURCES           = 5
POSITIVE_CI             = 0.8    # hidden CI at or above → positive instance
NEGATIVE_CI             = 0.2    # hidden CI at or below → negative instance
PROTOTYPE_SPREAD        = 0.02   # per-bag jitter around the bag prototype
LABEL_FLOOR             = 0.1    # regression labels are drawn from [LABEL_FLOOR, 1]

# window bags
WINDOW_HALO       = 2            # 5×5 window
BACKGROUND_PIXELS = 1600

# detection scoring
FAR_CAP = 1e-3

# default sweep grids
CONTAMINATION_SWEEP = tuple(round(0.1 * k, 1) for k in range(11))
PRIMARY_RATIO_SWEEP = tuple(round(0.1 * k, 1) for k in range(11))
SNR_SWEEP_DB        = tuple(float(db) for db in range(50, -1, -5))
