//! Multiindex bookkeeping shared by the symbol and verification modules.

/// All multiindices in `N_0^n` with `|α| <= max_order`, in lexicographic
/// order grouped by total order.
pub fn multiindices(n: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for order in 0..=max_order {
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, order);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos == cur.len() - 1 {
        cur[pos] = remaining;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v;
        fill(out, cur, pos + 1, remaining - v);
        cur[pos] = 0;
    }
}

/// All tuples `(α_1, …, α_m)` of multiindices in `N_0^n` with total
/// order `Σ|α_j| <= max_order`.
pub fn multiindex_tuples(m: usize, n: usize, max_order: u32) -> Vec<Vec<Vec<u32>>> {
    let singles = multiindices(n, max_order);
    let mut out: Vec<Vec<Vec<u32>>> = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::new();
        for prefix in &out {
            let used: u32 = prefix.iter().map(|a| a.iter().sum::<u32>()).sum();
            for s in &singles {
                if used + s.iter().sum::<u32>() <= max_order {
                    let mut t = prefix.clone();
                    t.push(s.clone());
                    next.push(t);
                }
            }
        }
        out = next;
    }
    out
}

pub fn order(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

/// `β <= α` componentwise.
pub fn leq(beta: &[u32], alpha: &[u32]) -> bool {
    beta.iter().zip(alpha).all(|(b, a)| b <= a)
}

/// All `β` with `β <= α` componentwise.
pub fn sub_multiindices(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &a in alpha {
        let mut next = Vec::new();
        for prefix in &out {
            for v in 0..=a {
                let mut t = prefix.clone();
                t.push(v);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn binom_scalar(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Componentwise binomial coefficient `C(α, β) = Π_i C(α_i, β_i)`.
pub fn binomial(alpha: &[u32], beta: &[u32]) -> f64 {
    alpha
        .iter()
        .zip(beta)
        .map(|(&a, &b)| binom_scalar(a, b))
        .product()
}

/// Componentwise difference `α - β` (requires `β <= α`).
pub fn mi_sub(alpha: &[u32], beta: &[u32]) -> Vec<u32> {
    alpha.iter().zip(beta).map(|(a, b)| a - b).collect()
}

/// Compact display like `(1,0,2)`.
pub fn mi_label(alpha: &[u32]) -> String {
    let inner: Vec<String> = alpha.iter().map(|v| v.to_string()).collect();
    format!("({})", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(multiindices(1, 3).len(), 4);
        assert_eq!(multiindices(2, 2).len(), 6); // 1 + 2 + 3
        assert_eq!(multiindex_tuples(2, 1, 2).len(), 6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(&[3], &[1]), 3.0);
        assert_eq!(binomial(&[2, 2], &[1, 2]), 2.0);
        assert_eq!(sub_multiindices(&[1, 1]).len(), 4);
    }
}
