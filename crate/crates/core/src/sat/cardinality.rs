use super::{Cnf, Lit};

/// Adds a sequential-counter encoding of `Σ vars ≤ k` to `cnf`.
///
/// Register `s[i][j]` is forced true when at least `j + 1` of the first
/// `i + 1` inputs are true; an input that would push the count past `k`
/// is blocked. Uses `(n − 1)·k` auxiliary variables and `O(n·k)` clauses.
pub fn encode_at_most_k(cnf: &mut Cnf, vars: &[Lit], k: usize) {
    let n = vars.len();
    if k >= n {
        return;
    }
    if k == 0 {
        for &x in vars {
            cnf.add_clause(vec![-x]);
        }
        return;
    }
    let regs: Vec<Vec<Lit>> = (0..n - 1)
        .map(|_| (0..k).map(|_| cnf.new_var()).collect())
        .collect();

    cnf.add_clause(vec![-vars[0], regs[0][0]]);
    for &s in &regs[0][1..] {
        cnf.add_clause(vec![-s]);
    }
    for i in 1..n - 1 {
        let (x, prev, cur) = (vars[i], &regs[i - 1], &regs[i]);
        cnf.add_clause(vec![-x, cur[0]]);
        cnf.add_clause(vec![-prev[0], cur[0]]);
        for j in 1..k {
            cnf.add_clause(vec![-x, -prev[j - 1], cur[j]]);
            cnf.add_clause(vec![-prev[j], cur[j]]);
        }
        cnf.add_clause(vec![-x, -prev[k - 1]]);
    }
    cnf.add_clause(vec![-vars[n - 1], -regs[n - 2][k - 1]]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_zero_forbids_everything() {
        let mut cnf = Cnf::new();
        let vars: Vec<Lit> = (0..3).map(|_| cnf.new_var()).collect();
        encode_at_most_k(&mut cnf, &vars, 0);
        assert_eq!(cnf.clauses, vec![vec![-1], vec![-2], vec![-3]]);
        assert_eq!(cnf.num_vars, 3);
    }

    #[test]
    fn k_at_least_n_is_vacuous() {
        let mut cnf = Cnf::new();
        let vars: Vec<Lit> = (0..3).map(|_| cnf.new_var()).collect();
        encode_at_most_k(&mut cnf, &vars, 3);
        encode_at_most_k(&mut cnf, &vars, 7);
        assert!(cnf.clauses.is_empty());
    }
}
