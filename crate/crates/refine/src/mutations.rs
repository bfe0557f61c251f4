//! Seeded defects for differential testing of the checker.
//!
//! Each entry edits one line of [`SANTA_STEPS`](crate::SANTA_STEPS) and
//! names the development step that must flip to Fail. The table is part of
//! the public surface so downstream gates can re-drive the same defects.

use crate::SANTA_STEPS;

pub struct Mutation {
    pub name: &'static str,
    pub from: &'static str,
    pub to: &'static str,
    /// 1-based occurrence of `from` to replace; two controller classes
    /// share some method and action lines verbatim.
    pub nth: usize,
    /// Index into [`STEP_TRIPLES`](crate::STEP_TRIPLES) for the step the
    /// defect must break.
    pub step: usize,
    /// First condition expected to fail.
    pub fails_at: &'static str,
}

pub const MUTATIONS: &[Mutation] = &[
    Mutation {
        name: "pull keeps the flag set",
        from: "  method pull() :: s = Riding -> s := Sleeping, b := False\n",
        to: "  method pull() :: s = Riding -> s := Sleeping\n",
        nth: 2,
        step: 3,
        fails_at: "M3",
    },
    Mutation {
        name: "weakened coupling relation",
        from: "couple R2 (s1) (s2, b2) :: ((s1 = Delivering) <=> (s2 in {Harnessing, Riding})) and (s1 = Delivering => b2 = True) and ((s1 = Sleeping) <=> (s2 = Sleeping)) and ((s1 = Helping) <=> (s2 = Helping))",
        to: "couple R2 (s1) (s2, b2) :: ((s1 = Delivering) <=> (s2 in {Harnessing, Riding})) and (s1 = Delivering => b2 = True)",
        nth: 1,
        step: 1,
        fails_at: "A1",
    },
    Mutation {
        name: "swapped flag guards",
        from: "  action :: s = Sleeping and b = True -> s := Harnessing\n  action :: s = Sleeping and b = False -> s := Helping\n",
        to: "  action :: s = Sleeping and b = False -> s := Harnessing\n  action :: s = Sleeping and b = True -> s := Helping\n",
        nth: 1,
        step: 1,
        fails_at: "A1",
    },
    Mutation {
        name: "wrong reset constant",
        from: "  method back() :: s = Back -> if c = 1 then s := Harnessing, c := 9 ; emit st.back else c := c - 1\n",
        to: "  method back() :: s = Back -> if c = 1 then s := Harnessing, c := 0 ; emit st.back else c := c - 1\n",
        nth: 1,
        step: 2,
        fails_at: "N1",
    },
    Mutation {
        name: "dropped emit",
        from: "  method back() :: s = Back -> if c = 1 then s := Harnessing, c := 9 ; emit st.back else c := c - 1\n",
        to: "  method back() :: s = Back -> if c = 1 then s := Harnessing, c := 9 else c := c - 1\n",
        nth: 1,
        step: 2,
        fails_at: "N1",
    },
    Mutation {
        name: "wrong emit label",
        from: "; emit st.back else",
        to: "; emit st.harness else",
        nth: 1,
        step: 2,
        fails_at: "N1",
    },
    Mutation {
        name: "self-loop action",
        from: "  action :: s = Sleeping -> s := Delivering\n",
        to: "  action :: s = Sleeping -> s := Sleeping\n",
        nth: 1,
        step: 0,
        fails_at: "A1",
    },
    Mutation {
        name: "enter goes to the wrong state",
        from: "  method enter() :: s = Welcoming -> s := Consulting\n",
        to: "  method enter() :: s = Welcoming -> s := Harnessing\n",
        nth: 1,
        step: 3,
        fails_at: "N2",
    },
    Mutation {
        name: "delivery ignores the flag",
        from: "  action :: s = Sleeping and b = True -> s := Harnessing\n",
        to: "  action :: s = Sleeping -> s := Harnessing\n",
        nth: 2,
        step: 3,
        fails_at: "A1",
    },
    Mutation {
        name: "off-by-one batch threshold",
        from: "  method puzzled() :: s = Puzzled -> if c = 2 then c := 3, s := Entering ; emit st.puzzled else c := c + 1\n",
        to: "  method puzzled() :: s = Puzzled -> if c = 1 then c := 3, s := Entering ; emit st.puzzled else c := c + 1\n",
        nth: 1,
        step: 4,
        fails_at: "N1",
    },
    Mutation {
        name: "consult skips one announcement",
        from: "  method consult() :: s = Consulting -> if c = 1 then c := 0, s := Puzzled ; emit st.consult else c := c - 1, s := Entering ; emit st.consult\n",
        to: "  method consult() :: s = Consulting -> if c = 1 then c := 0, s := Puzzled ; emit st.consult else c := c - 1, s := Entering\n",
        nth: 1,
        step: 4,
        fails_at: "N3",
    },
    Mutation {
        name: "tightened counter band",
        from: "couple R3 (s2) (s3, c3) :: s2 = s3 and c3 >= 1 and c3 <= 9",
        to: "couple R3 (s2) (s3, c3) :: s2 = s3 and c3 >= 2 and c3 <= 9",
        nth: 1,
        step: 2,
        fails_at: "N1",
    },
];

/// Replace the `nth` occurrence of `from` (1-based). Panics if `from` does
/// not occur that often, so a drifted fixture can't silently turn a
/// mutation into a no-op.
pub fn mutate_nth(base: &str, from: &str, to: &str, nth: usize) -> String {
    let mut search_from = 0;
    let mut found_at = None;
    for occurrence in 1..=nth {
        match base[search_from..].find(from) {
            Some(rel) => {
                let at = search_from + rel;
                if occurrence == nth {
                    found_at = Some(at);
                }
                search_from = at + from.len();
            }
            None => panic!("pattern occurs fewer than {nth} times: {from:?}"),
        }
    }
    let at = found_at.unwrap();
    format!("{}{}{}", &base[..at], to, &base[at + from.len()..])
}

pub fn apply_mutation(m: &Mutation) -> String {
    mutate_nth(SANTA_STEPS, m.from, m.to, m.nth)
}
