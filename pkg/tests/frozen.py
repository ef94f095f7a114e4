"""Reference values produced by ``scripts/oracles.py`` (independent numpy code)."""

# mu=1, sigma=1, theta=+-1, Euler at dt=1e-4, 1e5 paths
DDM_FINE = {
    "accuracy": 0.88421,
    "accuracy_se": 0.0010118432482356147,
    "mean_dt": 0.7669149839999998,
    "mean_dt_se": 0.0018567400821967851,
}
DDM_ANALYTIC = {"accuracy": 0.8807970779778823, "mean_dt": 0.7615941559557649}

# cue drifts [2, 0.5], halves of [0, 1), sign at T=1; dt=1e-4, 1e5 paths
MULTICUE_2AFC = {"p_a": 0.89269, "se": 0.0009787469739416823, "exact": 0.8943502263331446}

# K=3, S=[1.2, 1.0, 0.8], leak 2, inhibition 1, sigma 0.5, argmax at T=2; exact Gaussian endpoint, 2e6 samples
RACE_K3 = {"p_win": [0.5458415, 0.301947, 0.1522115], "n": 2_000_000}

# K=2, M=2, S=[[1, .2], [.2, 1]], halves, sigma 0.5, threshold 0.5, 1 s horizon; dt=1e-3, 1e5 paths
MULTICUE_RACE = {"p": [0.66795, 0.26669, 0.06536], "n": 100_000}

# S=(1, .5), sigma 1, threshold 1, no leak or inhibition; dt=1e-3, 1e4 paths per gain
LIP_SWEEP = [
    {"gamma_e": 0.4, "accuracy": 0.7132, "accuracy_se": 0.004522673545592253,
     "mean_dt": 2.0537038222933766, "mean_dt_se": 0.011479174882451476},
    {"gamma_e": 1.0, "accuracy": 0.6249, "accuracy_se": 0.004841487271490033,
     "mean_dt": 0.6676197, "mean_dt_se": 0.005768982496341561},
    {"gamma_e": 1.8, "accuracy": 0.5803, "accuracy_se": 0.004935097871369929,
     "mean_dt": 0.307969, "mean_dt_se": 0.003545399575466068},
]

STRATEGY_INDEX = {0: 0.25, 1: 0.32094214683510647, 2: 0.4008456393528252, 5: 0.6526395343910887,
                  10: 0.9104979672557869, 20: 0.9962877354866897}
REWARD_RATE_085_076 = 0.41262135922330095
