from nv_magnetometry.sequences.plan import SequencePlan

# decoupling plans compared with the reference overlap
oracle_plans = []
oracle_plans.append(SequencePlan("cpmg", 3.72, n_pulses=4))
oracle_plans.append(SequencePlan("cpmg", 2.0, n_pulses=16))
oracle_plans.append(SequencePlan("xy4", 3.72, n_pulses=8))
oracle_plans.append(SequencePlan("xy8", 1.75, n_pulses=16))
oracle_plans.append(SequencePlan("xy16", 2.4, n_pulses=16))

# plans for which zero couplings must reproduce the nucleus-free result
factorization_plans = oracle_plans + [
    SequencePlan("ramsey", 0.3),
    SequencePlan("hahn", 7.0),
    SequencePlan("cp", 5.0, n_pulses=3),
    SequencePlan("correlation", 3.72, n_pulses=4, t_corr=12.5),
    SequencePlan(
        "correlation-multipulse", 3.72, n_pulses=4, inner_pulses=6
    ),
]

# (peak Rabi MHz, shape, duration ns, expected flip probability)
rotation_cases = []
rotation_cases.append((10.0, "square", 50.0, 1.0))
rotation_cases.append((10.0, "square", 25.0, 0.5))
rotation_cases.append((10.0, "cosine-square", 100.0, 1.0))
rotation_cases.append((2.0, "square", 250.0, 1.0))

# (readout bright, dark per shot, shots)
readout_cases = []
readout_cases.append((0.02, 0.014, 100000))
readout_cases.append((0.3, 0.21, 100000))
readout_cases.append((0.05, 0.03, 20000))
