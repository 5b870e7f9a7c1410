"""Regenerate sample_eval_expected.json from the naive mpmath oracle.

Run from the repository root: ``python tests/fixtures/make_eval_fixture.py``.
"""

import json
import pathlib

from innerbounds.naive import naive_values
from innerbounds.serialize import dumps_json, read_instance

here = pathlib.Path(__file__).parent
inst, params, _ = read_instance((here / "sample_instance.json").read_text())
values = naive_values(inst.gram.g.tolist(), inst.proj.proj.tolist(), inst.proj.norm_x_sq, inst.c.tolist(),
                      params.pq.p, params.ab.p, params.gd.p)
(here / "sample_eval_expected.json").write_text(dumps_json({"params": {"p": params.pq.p, "alpha": params.ab.p,
                                                                        "gamma": params.gd.p},
                                                             "values": values}))
