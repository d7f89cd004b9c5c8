"""Command line front end. Every subcommand prints one JSON report line.

Exit codes: 0 pass or value, 1 refuted, 2 input error, 3 resource cap,
4 internal verification failure.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

from . import algebra, constructions, formula, frames, genspace

OK, REFUTED, INPUT_ERROR, CAP_EXCEEDED, VERIFICATION_FAILED = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def digest(*parts):
    h = hashlib.sha256()
    for p in parts:
        h.update(json.dumps(p, sort_keys=True, default=str).encode())
    return h.hexdigest()[:16]


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}")


def load_structure(path):
    """Frames, spaces and bare fields are all accepted."""
    data = read_json(path)
    try:
        if "members" in data and "closure" in data:
            return algebra.field_from_json(data), data
        return genspace.structure_from_json(data), data
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}")


def load_frame(path):
    data = read_json(path)
    try:
        if "worlds" in data:
            return frames.frame_from_json(data), data
        return genspace.structure_from_json(data).frame(), data
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}")


def parse_formula(text):
    try:
        return formula.parse(text)
    except formula.FormulaSyntaxError as exc:
        raise InputError(str(exc))


def parse_mask_list(text):
    """'0,2' -> mask with bits 0 and 2."""
    if text is None or text == "":
        return 0
    try:
        return frames.mask_of(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"bad world list {text!r}")


def write_artifacts(out, stem, payload, dot=None):
    if not out:
        return {}
    os.makedirs(out, exist_ok=True)
    files = {}
    path = os.path.join(out, stem + ".json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
    files["json"] = path
    if dot is not None:
        path = os.path.join(out, stem + ".dot")
        with open(path, "w") as fh:
            fh.write(dot + "\n")
        files["dot"] = path
    return files


def worlds_of(mask):
    return frames.bits(mask)


# --------------------------------------------------------------- commands

def cmd_validity(args):
    structure, data = load_structure(args.structure)
    phi = parse_formula(args.formula)
    report = algebra.validates(structure, phi, cap=args.max_letters)
    inputs = digest(data, args.formula)
    if report.valid:
        return OK, {"verdict": "valid"}, inputs
    counter = {"valuation": {p: worlds_of(m) for p, m in report.valuation.items()},
               "world": report.world}
    return REFUTED, {"verdict": "refuted", "counterexample": counter}, inputs


def cmd_construct(args):
    kind = args.kind
    params = {k: v for k, v in vars(args).items() if k in
              ("alpha", "size", "branching", "depth", "limits", "frame", "stages", "children_first")}
    inputs = digest(kind, params)
    try:
        if kind == "fork":
            f = frames.make_fork(args.alpha)
            files = write_artifacts(args.out, f"fork{args.alpha}", frames.frame_to_json(f), frames.frame_to_dot(f))
            return OK, {"verdict": "value", "worlds": f.size, "pairs": len(f.relation),
                        "artifact": frames.frame_to_json(f), "dot": frames.frame_to_dot(f), "files": files}, inputs
        if kind == "cluster":
            f = frames.make_cluster(args.size)
            files = write_artifacts(args.out, f"cluster{args.size}", frames.frame_to_json(f), frames.frame_to_dot(f))
            return OK, {"verdict": "value", "worlds": f.size, "artifact": frames.frame_to_json(f),
                        "files": files}, inputs
        if kind == "tree":
            t = frames.truncated_tree(args.branching, args.depth, args.limits)
            payload = frames.frame_to_json(t.frame)
            payload["limit"] = sorted("".join(map(str, n)) for n in t.limit)
            files = write_artifacts(args.out, "tree", payload, frames.frame_to_dot(t.frame))
            return OK, {"verdict": "value", "nodes": len(t.nodes), "files": files}, inputs
        if kind == "tcomb":
            if not args.frame:
                raise InputError("tcomb needs --frame")
            f, _ = load_frame(args.frame)
            m = constructions.tcomb_labeling(f, args.depth)
            rep = constructions.verify_comb_pmorphism(m, f)
            files = write_artifacts(args.out, "tcomb", m.to_json())
            body = {"verdict": "pass" if rep.ok else "fail", "margin": rep.margin,
                    "image": sorted(rep.image), "files": files}
            if not rep.ok:
                body["counterexample"] = {"forth": rep.forth_violation, "back": rep.back_violation}
                return VERIFICATION_FAILED, body, inputs
            return OK, body, inputs
        if kind == "interval":
            c = constructions.interval_construction(args.depth, args.stages)
            rep = constructions.verify_interval_lemmas(c)
            files = write_artifacts(args.out, "interval", c.to_json())
            body = {"verdict": "pass" if rep.ok else "fail",
                    "max_lengths": {k: str(v) for k, v in rep.max_lengths.items()},
                    "intervals": sum(len(level) for level in c.levels), "files": files}
            if not rep.ok:
                body["counterexample"] = [str(p) for p in rep.problems[:5]]
                return VERIFICATION_FAILED, body, inputs
            return OK, body, inputs
        if kind == "cantor-lalpha":
            m = constructions.cantor_to_Lalpha(args.branching, args.depth, args.children_first)
            rep = constructions.verify_cantor_claim(m)
            files = write_artifacts(args.out, "cantor_lalpha", m.to_json())
            body = {"verdict": "pass" if rep.ok else "fail", "checked": rep.checked, "files": files}
            if not rep.ok:
                body["counterexample"] = rep.violation
                return VERIFICATION_FAILED, body, inputs
            return OK, body, inputs
        if kind == "qstage":
            if not args.frame:
                raise InputError("qstage needs --frame")
            f, _ = load_frame(args.frame)
            st = constructions.q_stage(f, args.stages)
            rep = constructions.verify_q_stage(st)
            payload = {"points": [{"x": f"{p.position.numerator}/{p.position.denominator}",
                                   "label": p.label} for p in st.ordered()]}
            files = write_artifacts(args.out, "qstage", payload)
            body = {"verdict": "pass" if rep.ok else "fail", "points": len(st.points), "files": files}
            return (OK if rep.ok else VERIFICATION_FAILED), body, inputs
    except ValueError as exc:
        raise InputError(str(exc))
    raise InputError(f"unknown construction {kind}")


def spec_from_json(data):
    try:
        parts = [genspace.structure_from_json(p) for p in data["parts"]]
        shared = genspace.structure_from_json(data["shared"])
        return genspace.GluingSpec(parts, shared, [list(e) for e in data["embeddings"]])
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad gluing spec: {exc}")


def cmd_glue(args):
    data = read_json(args.spec)
    spec = spec_from_json(data)
    try:
        result = genspace.glue(spec)
    except genspace.GluingError as exc:
        raise InputError(str(exc))
    parts, _ = genspace.validate_gluing(spec)
    total, _ = genspace.space_sum(parts)
    rep = genspace.check_interior_map(result.rho, total, result.structure)
    payload = genspace.structure_to_json(result.structure)
    payload["rho"] = result.rho
    dot = genspace.specialization_dot(result.structure, "glued")
    files = write_artifacts(args.out, "glued", payload, dot)
    body = {"verdict": "pass" if rep.ok else "fail", "points": result.structure.carrier_size,
            "rho": result.rho, "files": files, "dot": dot}
    if not rep.ok:
        body["counterexample"] = {"condition": rep.condition, "witness": rep.witness}
        return VERIFICATION_FAILED, body, digest(data)
    return OK, body, digest(data)


def cmd_cgfp(args):
    structure, data = load_structure(args.structure)
    if not isinstance(structure, genspace.GeneralStructure):
        raise InputError("cgfp needs a frame or a space")
    phi = parse_formula(args.formula)
    if args.valuation:
        try:
            valuation = {k: frames.mask_of(v) for k, v in json.loads(args.valuation).items()}
        except (ValueError, AttributeError, TypeError) as exc:
            raise InputError(f"bad valuation: {exc}")
        world = args.world
    else:
        found = algebra.validates(structure, phi)
        if found.valid:
            return REFUTED, {"verdict": "valid", "note": "nothing to select: formula is valid"}, digest(data, args.formula)
        valuation, world = found.valuation, found.world
    if world is None:
        raise InputError("--world is required with --valuation")
    seed = worlds_of(parse_mask_list(args.seed_worlds))
    try:
        result = constructions.cgfp_select(structure, phi, valuation, world, seed)
    except constructions.SelectionError as exc:
        raise InputError(str(exc))
    payload = {"kept": result.kept_worlds, "relation": [list(p) for p in sorted(result.frame.relation)],
               "field": result.restricted_field.sorted_members(),
               "valuation": {p: worlds_of(m) for p, m in result.valuation.items()}}
    files = write_artifacts(args.out, "cgfp", payload)
    body = {"verdict": "pass" if result.truth_lemma and result.refuted else "fail",
            "kept": result.kept_worlds, "truth_lemma": result.truth_lemma,
            "refuted": result.refuted, "field_enlarged": result.enlarged, "files": files}
    code = OK if result.truth_lemma and result.refuted else VERIFICATION_FAILED
    return code, body, digest(data, args.formula, args.valuation, args.world, args.seed_worlds)


def cmd_translate(args):
    phi = parse_formula(args.formula)
    try:
        out = formula.godel_translate(phi)
    except ValueError as exc:
        raise InputError(str(exc))
    return OK, {"verdict": "value", "value": formula.to_text(out)}, digest(args.formula)


def cmd_convert(args):
    structure, data = load_structure(args.structure)
    if not isinstance(structure, genspace.GeneralStructure):
        raise InputError("convert needs a frame or a space")
    try:
        if args.to == "frame":
            out = genspace.to_frame(structure) if not structure.is_frame else structure
        else:
            out = genspace.to_space(structure) if structure.is_frame else structure
    except genspace.NotTightError as exc:
        return VERIFICATION_FAILED, {"verdict": "fail", "counterexample": list(exc.witness)}, digest(data)
    except ValueError as exc:
        raise InputError(str(exc))
    payload = genspace.structure_to_json(out)
    files = write_artifacts(args.out, f"converted_{args.to}", payload)
    return OK, {"verdict": "value", "artifact": payload, "files": files}, digest(data, args.to)


def cmd_check(args):
    what = args.property
    if what == "s4":
        f, data = load_frame(args.files[0])
        rep = frames.check_s4(f)
        body = {"verdict": "pass" if rep.ok else "fail"}
        if not rep.ok:
            body["counterexample"] = rep.violation
        return (OK if rep.ok else REFUTED), body, digest(data)
    if what in ("pmorphism", "interior"):
        if len(args.files) != 3:
            raise InputError(f"{what} needs SOURCE TARGET MAP files")
        mapping = read_json(args.files[2])
        if isinstance(mapping, dict):
            mapping = mapping.get("map", mapping.get("assignment"))
        if what == "pmorphism":
            src, d1 = load_frame(args.files[0])
            tgt, d2 = load_frame(args.files[1])
            try:
                fmap = frames.FrameMap(src, tgt, mapping)
            except ValueError as exc:
                raise InputError(str(exc))
            rep = frames.check_p_morphism(fmap)
            body = {"verdict": "pass" if rep.ok else "fail"}
            if not rep.ok:
                body["counterexample"] = {"condition": rep.condition, "witness": rep.witness}
            return (OK if rep.ok else REFUTED), body, digest(d1, d2, mapping)
        src, d1 = load_structure(args.files[0])
        tgt, d2 = load_structure(args.files[1])
        rep = genspace.check_interior_map(mapping, src, tgt)
        body = {"verdict": "pass" if rep.ok else "fail"}
        if not rep.ok:
            body["counterexample"] = {"condition": rep.condition, "witness": rep.witness}
        return (OK if rep.ok else REFUTED), body, digest(d1, d2, mapping)
    structure, data = load_structure(args.files[0])
    if what == "descriptive":
        if not isinstance(structure, genspace.GeneralStructure):
            raise InputError("descriptive needs a frame or a space")
        rep = genspace.check_descriptive(structure)
        body = {"verdict": "pass" if rep.descriptive else "fail",
                "differentiated": rep.differentiated, "compact": rep.compact, "tight": rep.tight}
        if rep.witness:
            body["counterexample"] = list(rep.witness)
        return (OK if rep.descriptive else REFUTED), body, digest(data)
    field = algebra.as_field(structure)
    value = algebra.is_connected(field) if what == "connected" else algebra.is_well_connected(field)
    return (OK if value else REFUTED), {"verdict": "pass" if value else "fail"}, digest(data)


# ------------------------------------------------------------------ parser

def build_parser():
    p = argparse.ArgumentParser(prog="topos4", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0, help="seed for randomized work (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validity", help="exhaustive validity check of a formula")
    v.add_argument("structure")
    v.add_argument("formula")
    v.add_argument("--max-letters", type=int, default=None)
    v.set_defaults(run=cmd_validity)

    c = sub.add_parser("construct", help="build a named construction and verify it")
    c.add_argument("kind", choices=["tcomb", "interval", "cantor-lalpha", "fork", "cluster", "tree", "qstage"])
    c.add_argument("--alpha", type=int, default=1)
    c.add_argument("--size", type=int, default=1)
    c.add_argument("--branching", type=int, default=2)
    c.add_argument("--depth", type=int, default=3)
    c.add_argument("--limits", action="store_true")
    c.add_argument("--children-first", action="store_true")
    c.add_argument("--frame")
    c.add_argument("--stages", type=int, default=2)
    c.add_argument("--out")
    c.set_defaults(run=cmd_construct)

    g = sub.add_parser("glue", help="glue general structures along a shared open piece")
    g.add_argument("spec")
    g.add_argument("--out")
    g.set_defaults(run=cmd_glue)

    s = sub.add_parser("cgfp", help="select a small refuting subframe")
    s.add_argument("structure")
    s.add_argument("formula")
    s.add_argument("--valuation", help='JSON, e.g. {"p": [0]}')
    s.add_argument("--world", type=int)
    s.add_argument("--seed-worlds", default="")
    s.add_argument("--out")
    s.set_defaults(run=cmd_cgfp)

    t = sub.add_parser("translate", help="Goedel translation of an intuitionistic formula")
    t.add_argument("formula")
    t.set_defaults(run=cmd_translate)

    k = sub.add_parser("convert", help="general frame <-> general space")
    k.add_argument("structure")
    k.add_argument("--to", choices=["frame", "space"], required=True)
    k.add_argument("--out")
    k.set_defaults(run=cmd_convert)

    h = sub.add_parser("check", help="property checkers")
    h.add_argument("property", choices=["s4", "pmorphism", "interior", "descriptive",
                                        "connected", "well-connected"])
    h.add_argument("files", nargs="+")
    h.set_defaults(run=cmd_check)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    start = time.perf_counter()
    try:
        code, body, inputs = args.run(args)
    except InputError as exc:
        code, body, inputs = INPUT_ERROR, {"verdict": "error", "error": str(exc)}, None
    except algebra.CapExceeded as exc:
        code, body, inputs = CAP_EXCEEDED, {"verdict": "error", "error": str(exc)}, None
    report = {"command": args.command, "inputs": inputs, "seed": args.seed}
    report.update(body)
    report.setdefault("counterexample", None)
    report["timing_ms"] = round((time.perf_counter() - start) * 1000, 3)
    print(json.dumps(report, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())
