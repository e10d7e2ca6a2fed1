"""Elect cluster heads and watch the ordered rules play out.

Eligibility first: a member that cannot reach the base station can never
be head, however central it sits. Among the eligible, the most central
member (lowest summed distance to the others) wins; remaining battery
breaks distance ties. Because the head pays for the base-station uplink,
its battery drains faster and a tie-break flips the election.
"""

from dfedsim import HeadCandidateView, select_head

# device 2 is the most central member of this cluster but has no
# base-station link, so it is filtered out before ranking even starts
battery = {0: 90.0, 1: 88.0}


def candidates():
    views = [
        HeadCandidateView(device_id=i, bs_connectable=True,
                          aggregated_distance_m=12.0, battery=battery[i],
                          mobile=False, bs_latency_s=0.05 + 0.01 * i)
        for i in sorted(battery)
    ]
    views.append(HeadCandidateView(device_id=2, bs_connectable=False,
                                   aggregated_distance_m=5.0, battery=100.0,
                                   mobile=False, bs_latency_s=0.3))
    return views


print("devices 0 and 1 tie on distance (12 m); device 2 is closer (5 m)"
      " but cut off from the base station\n")
print("round  battery0  battery1  head")
for rnd in range(6):
    head = select_head(candidates())
    print(f"{rnd:>5}  {battery[0]:8.1f}  {battery[1]:8.1f}  {head:>4}")
    for i in battery:
        battery[i] = max(0.0, battery[i] - (12.0 if i == head else 1.5))

print("\nthe uplink cost keeps handing the role to whichever device"
      " currently holds more charge")

# distance outranks battery: a nearly drained central device still wins
central = HeadCandidateView(1, True, 8.0, 5.0, False, 0.09)
remote = HeadCandidateView(0, True, 30.0, 100.0, False, 0.05)
print("\ncentral-but-drained vs remote-but-full:",
      select_head([central, remote]), "(the central one)")
