"""
Relative states: a cat and a pair of dice
=========================================

A cat in an even superposition writes "alive" into its own memory only on
the alive branch; the state relative to that record is exactly |L>. Dice
throws into 8-level registers split the state into 6^n equal branches.
"""
from pureqm import hilbert, measurement

cat = measurement.cat_scenario()
print("cat final:", cat.final.nonzero())
print("relative to 'alive' memo:", cat.given_alive.amplitudes)
print("relative to blank memo:", cat.given_omega.amplitudes)
print("weight of the memo branch:", hilbert.born_probability(cat.final, "C'", measurement.MEMO_ALIVE))

for n in range(1, 5):
    rec = measurement.dice_scenario(n)
    print(f"{n} throws: {rec.branch_count} branches, amplitude {rec.expected_amplitude:.6f}, "
          f"error {rec.max_amplitude_error:.1e}")
