//! Benchmark scenarios shared by the criterion benches: the synthetic
//! worst-case f/g family and an arithmetic e-graph saturated from the
//! checked-in suite files.

use rem_core::{
    add_term, parse_lines, parse_pattern, parse_rules, parse_term, saturate, EGraph, Pattern,
    SaturateOptions,
};

pub const MATH_RULES: &str = include_str!("../../../suites/math.rules");
pub const MATH_TERMS: &str = include_str!("../../../suites/math.terms");
pub const MATH_PATTERNS: &str = include_str!("../../../suites/math.patterns");

/// Parses the checked-in probe patterns.
pub fn math_patterns() -> Vec<Pattern> {
    parse_lines(MATH_PATTERNS, parse_pattern).expect("suite patterns parse")
}

/// The probe patterns with a repeated variable, the shapes backtracking
/// matchers are worst at.
pub fn nonlinear_math_patterns() -> Vec<Pattern> {
    math_patterns()
        .into_iter()
        .filter(|p| {
            let vars = p.variables();
            let mut occurrences = 0usize;
            count_var_occurrences(p, &mut occurrences);
            occurrences > vars.len()
        })
        .collect()
}

fn count_var_occurrences(p: &Pattern, n: &mut usize) {
    match p {
        Pattern::Var(_) => *n += 1,
        Pattern::App(_, children) => children.iter().for_each(|c| count_var_occurrences(c, n)),
    }
}

/// Saturates the arithmetic suite until roughly `max_nodes` e-nodes.
pub fn saturated_math(max_nodes: usize) -> EGraph {
    let mut eg = EGraph::new();
    for term in parse_lines(MATH_TERMS, parse_term).expect("suite terms parse") {
        add_term(&mut eg, &term).expect("suite terms insert");
    }
    eg.rebuild();
    let rules = parse_rules(MATH_RULES).expect("suite rules parse");
    let opts = SaturateOptions { max_iterations: 50, max_nodes };
    saturate(&mut eg, &rules, &opts).expect("saturation runs");
    eg
}
