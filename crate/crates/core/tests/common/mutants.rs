//! Corrupted variants of the bundled proof scripts with the error each one
//! must produce.

pub struct Mutant {
    pub name: &'static str,
    pub script: &'static str,
    pub find: &'static str,
    pub replace: &'static str,
    pub code: &'static str,
    pub path: &'static [&'static str],
}

const R: &str = "reservation.proof";
const LW: &str = "length_width.proof";

macro_rules! m {
    ($name:expr, $script:expr, $find:expr, $replace:expr, $code:expr, [$($p:expr),*]) => {
        Mutant { name: $name, script: $script, find: $find, replace: $replace, code: $code, path: &[$($p),*] }
    };
}

pub const MUTANTS: &[Mutant] = &[
    m!("stab premise dropped", R, "rule=r-act2 premises=[re1, t2]", "rule=r-act2 premises=[re1]", "ShapeMismatch", ["lemma", "forward", "boxed", "cases", "stab"]),
    m!("act premise dropped", R, "rule=r-act1 premises=[cl1, t2]", "rule=r-act1 premises=[t2]", "ShapeMismatch", ["lemma", "forward", "boxed", "cases", "act"]),
    m!("stab rule swapped", R, "rule=r-act2 premises=[re1, t2]", "rule=r-act1 premises=[re1, t2]", "ShapeMismatch", ["lemma", "forward", "boxed", "cases", "stab"]),
    m!("act rule swapped", R, "rule=r-act1 premises=[cl1, t2]", "rule=c-act premises=[cl1, t2]", "ShapeMismatch", ["lemma", "forward", "boxed", "cases", "act"]),
    m!("unknown rule", R, "rule=iff-I", "rule=iff-intro", "UnknownRule", ["lemma"]),
    m!("or-E discharge index", R, "discharge=[1] conclude S',V |- re(c)", "discharge=[5] conclude S',V |- re(c)", "BadDischarge", ["lemma", "forward", "boxed", "cases"]),
    m!("or-E discharge missing", R, "premises=[disj3, stab, act] discharge=[1]", "premises=[disj3, stab, act]", "UnjustifiedLeaf", ["lemma", "forward", "boxed", "cases", "stab", "re1"]),
    m!("box-I discharge index", R, "discharge=[2]", "discharge=[3]", "BadDischarge", ["lemma", "forward", "boxed"]),
    m!("imp-I discharge index", R, "premises=[boxed] discharge=[3]", "premises=[boxed] discharge=[1]", "BadDischarge", ["lemma", "forward"]),
    m!("box-I target not fresh", R, "node cases: rule=or-E premises=[disj3, stab, act]", "assume sre: S',V |- re(c)\nnode cases: rule=or-E premises=[disj3, stab, sre]", "FreshnessViolation", ["lemma", "forward", "boxed"]),
    m!("relational assumption deleted", R, "assume-rel T: S,V -[r(c)]-> S',V\n", "", "UnjustifiedLeaf", ["lemma", "backward", "before", "after", "T"]),
    m!("box-E premise swapped", R, "premises=[T, box1]", "premises=[box1, T]", "ShapeMismatch", ["lemma", "backward", "before", "after"]),
    m!("r-back without transition", R, "premises=[after, T]", "premises=[after]", "ShapeMismatch", ["lemma", "backward", "before"]),
    m!("iff-I premises swapped", R, "premises=[forward, backward]", "premises=[backward, forward]", "ShapeMismatch", ["lemma"]),
    m!("act concludes a claim", R, "premises=[cl1, t2] conclude S',V |- re(c)", "premises=[cl1, t2] conclude S',V |- cl(c)", "ShapeMismatch", ["lemma", "forward", "boxed", "cases", "act"]),
    m!("undeclared snapshot", R, "node after: rule=box-E premises=[T, box1] conclude S',V", "node after: rule=box-E premises=[T, box1] conclude S'',V", "UndeclaredLabel", ["lemma", "backward", "before", "after"]),
    m!("cycle", R, "premises=[forward, backward]", "premises=[forward, lemma]", "Cycle", ["lemma", "lemma"]),
    m!("RV on width", LW, "hyp a1 [1]: S,V1 |- l = x\nhyp b1 [1]: S,V2 |- l = x\nnode pi1: rule=RV premises=[a1, r1] conclude S,V |- l = x", "hyp a1 [1]: S,V1 |- w = 1\nhyp b1 [1]: S,V2 |- l = x\nnode pi1: rule=RV premises=[a1, r1] conclude S,V |- w = 1", "SideConditionViolated", ["lemma", "dir1", "split", "pi1"]),
    m!("RV premise dropped", LW, "rule=RV premises=[a1, r1]", "rule=RV premises=[a1]", "ShapeMismatch", ["lemma", "dir1", "split", "pi1"]),
    m!("RH instead of RV", LW, "rule=RV premises=[b1, r1]", "rule=RH premises=[b1, r1]", "ShapeMismatch", ["lemma", "dir1", "split", "pi2"]),
    m!("vchop-E eigenview reused", LW, "with={V1,V2} conclude S,V |- l = x\n", "with={V1,V} conclude S,V |- l = x\n", "BadDischarge", ["lemma", "dir1", "split"]),
    m!("vchop-E discharge index", LW, "premises=[lw2, pi1, pi2] discharge=[1]", "premises=[lw2, pi1, pi2] discharge=[2]", "BadDischarge", ["lemma", "dir1", "split"]),
    m!("vdec swapped for hdec", LW, "rule=vdec", "rule=hdec", "ShapeMismatch", ["lemma", "dir2", "pick", "dec"]),
    m!("vchop-I relation dropped", LW, "premises=[pv1, pv2, r2]", "premises=[pv1, pv2]", "ShapeMismatch", ["lemma", "dir2", "pick", "glue"]),
    m!("vexists-E discharge index", LW, "premises=[dec, glue] discharge=[4]", "premises=[dec, glue] discharge=[3]", "BadDischarge", ["lemma", "dir2", "pick"]),
    m!("vchop-I parts swapped", LW, "premises=[pv1, pv2, r2]", "premises=[pv2, pv1, r2]", "ShapeMismatch", ["lemma", "dir2", "pick", "glue"]),
];
