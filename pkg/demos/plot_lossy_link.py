"""
The three-byte link under loss and bit noise
============================================

Every frame on the car's radio link is (address, data, check) with an XOR
check byte.  The left panel measures the corrupted-delivery fraction against
the binomial prediction 1-(1-p)^24 as the per-bit flip probability rises.
The right panel shows how long a congestion alarm takes to reach the ground
station at 50% packet loss with retransmit-until-ack.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from autopark import comms

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# ------------------------------------------------------- corruption rate sweep
flip_probs = np.logspace(-4, -1.5, 10)
measured = []
for p in flip_probs:
    ch = comms.Channel(comms.ChannelModel(0.0, float(p), 1), np.random.default_rng(5))
    frame = comms.encode(0x10, ord("S"))
    n = 20_000
    for t in range(n):
        ch.send(frame, t)
    bad = sum(1 for got in ch.poll(n + 2) if got != frame)
    measured.append(bad / n)

fig, axes = plt.subplots(1, 2, figsize=(10, 3.4))
axes[0].loglog(flip_probs, measured, "o", label="simulated")
axes[0].loglog(flip_probs, 1 - (1 - flip_probs) ** 24, "-", label="binomial 1-(1-p)^24")
axes[0].set_xlabel("per-bit flip probability")
axes[0].set_ylabel("corrupted frame fraction")
axes[0].legend()

# ------------------------------------------------- alarm latency under 50% loss
latencies = []
for seed in range(300):
    seq = np.random.SeedSequence(seed)
    up_rng, down_rng = (np.random.default_rng(s) for s in seq.spawn(2))
    chan_up = comms.Channel(comms.ChannelModel(0.5, 0.0, 1), up_rng)
    chan_down = comms.Channel(comms.ChannelModel(0.5, 0.0, 1), down_rng)
    car = comms.CarEndpoint(retransmit_ticks=10)
    gs = comms.GroundStation()
    arrival = None
    for t in range(1000):
        alarms = ["C"] if t == 0 else []
        for frame in car.step(t, status="S", slot_id=None, alarms=alarms,
                              inbox=chan_down.poll(t)):
            chan_up.send(frame, t)
        up, down = gs.step(t, inbox=chan_up.poll(t), commands=[])
        for frame in down:
            chan_down.send(frame, t)
        if arrival is None and any(m.get("code") == "C" for m in up):
            arrival = t
            break
    latencies.append(arrival)

axes[1].hist(latencies, bins=range(0, 62, 2), color="tab:green", alpha=0.8)
axes[1].set_xlabel("delivery tick of the congestion alarm")
axes[1].set_ylabel("runs (of 300 seeds)")
axes[1].set_title("50% loss, retransmit every 10 ticks")
fig.tight_layout()
fig.savefig(OUT / "lossy_link.png", dpi=130)
print(f"wrote {OUT}/lossy_link.png")
