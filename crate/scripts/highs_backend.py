#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write a `pairs` solution file.

usage: highs_backend.py MODEL.mps SOLUTION.txt [GAP]
"""
import sys

import highspy


def main(argv):
    if len(argv) not in (3, 4):
        sys.stderr.write(__doc__)
        return 1
    mps, sol = argv[1], argv[2]
    gap = float(argv[3]) if len(argv) == 4 else 1e-4

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", gap)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("threads", 1)
    if h.readModel(mps) != highspy.HighsStatus.kOk:
        sys.stderr.write(f"cannot read {mps}\n")
        return 1
    h.run()

    status = h.getModelStatus()
    info = h.getInfo()
    lp = h.getLp()
    with open(sol, "w") as f:
        if status == highspy.HighsModelStatus.kOptimal:
            f.write("status optimal\n")
        elif status in (highspy.HighsModelStatus.kInfeasible,
                        highspy.HighsModelStatus.kUnboundedOrInfeasible):
            f.write("status infeasible\n")
            return 0
        elif info.primal_solution_status == 2:
            f.write("status feasible\n")
        else:
            f.write(f"status error {h.modelStatusToString(status).replace(' ', '_')}\n")
            return 0
        f.write(f"objective {info.objective_function_value!r}\n")
        values = h.getSolution().col_value
        for name, value in zip(lp.col_names_, values):
            f.write(f"{name} {float(value)!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
