/// True once the last `window` points of both running metrics stay within
/// `epsilon` of each other.
pub fn check_convergence(history: &[(f64, f64)], window: usize, epsilon: f64) -> bool {
    if window == 0 || history.len() < window {
        return false;
    }
    let tail = &history[history.len() - window..];
    let spread = |f: fn(&(f64, f64)) -> f64| {
        let (lo, hi) = tail
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    spread(|p| p.0) <= epsilon && spread(|p| p.1) <= epsilon
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_history_never_converges() {
        assert!(!check_convergence(&[(0.5, 0.1); 4], 5, 0.1));
    }

    #[test]
    fn flat_tail_converges() {
        let mut h = vec![(0.1, 0.9), (0.9, 0.1)];
        h.extend([(0.5, 0.2); 5]);
        assert!(check_convergence(&h, 5, 1e-9));
    }

    #[test]
    fn oscillation_does_not_converge() {
        let h: Vec<(f64, f64)> = (0..10).map(|i| (0.5 + if i % 2 == 0 { 0.05 } else { -0.05 }, 0.1)).collect();
        assert!(!check_convergence(&h, 5, 0.01));
    }

    #[test]
    fn either_metric_can_block() {
        let h: Vec<(f64, f64)> = (0..5).map(|i| (0.5, 0.1 + i as f64 * 0.01)).collect();
        assert!(!check_convergence(&h, 5, 0.005));
        assert!(check_convergence(&h, 5, 0.05));
    }
}
