import os

base_dir = os.path.dirname(os.path.abspath(__file__))
logs_dir = os.path.join(base_dir, "logs")
data_dir = os.path.join(base_dir, "data")
scenarios_dir = os.path.join(base_dir, "scenarios")
os.makedirs(logs_dir, exist_ok=True)

SCENARIO_VERSION = 1

# State range S and transmit power range P of the analog link
default_ranges = {
    "s": [0.0, 10.0],
    "p": [1.0, 5.0],
}

# Convergence detection: max_i |x_i - x*| <= REL_TOL * max(1, |x*|)
REL_TOL = 1e-9
MAX_ITERS = 10_000

# FTC window length at k = 0
INITIAL_WINDOW = 2

# TDMA costs one slot per agent per iteration; superposition costs data + pilot
SUPERPOSITION_SLOTS = 2

default_channel = {"kind": "rayleigh", "scale": 1.0}

# Complex-baseband transceiver
default_baseband = {
    "m": 256,
    "noise_sigma2": 1e-4,
    "pilot_noise_sigma2": 1e-4,
}
BASEBAND_RETRIES = 5

# Random topologies
DEFAULT_DENSITY = 0.3

# TDMA comparison sweep
comparison_defaults = {
    "n_min": 3,
    "n_max": 100,
    "trials": 100,
    "density": 0.1,
    "workers": 4,
    "max_iters": MAX_ITERS,
}

# Nomographic failure demo
nomographic_defaults = {
    "xs": [1.0, 2.0, 3.0],
    "p_values": [1, 2, 5, 10, 20, 50],
    # additive receiver noise as a fraction of (P_max - P_min)
    "noise_fraction": 1e-3,
}

# Trace and comparison CSV headers
TRACE_COLUMNS = ["k", "agent", "x", "y", "t_window", "u", "v_lyapunov"]
COMPARISON_COLUMNS = ["n", "trial", "k_t_slots", "k_b_slots", "ratio"]
NOMOGRAPHIC_COLUMNS = ["p", "abs_error"]
