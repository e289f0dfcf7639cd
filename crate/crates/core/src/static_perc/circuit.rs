use std::collections::BTreeSet;

use crate::lattice::{order_cycle, validate_circuit, Circuit, LatticeKind, NONE};
use crate::static_perc::Configuration;

/// Γ_r: the innermost open circuit enclosing B_r inside the configuration's
/// ball, or None when no such circuit exists.
///
/// The closed cluster grown from B_r (B_r itself treated as passable) is
/// filled in; the open layer around the fill is then pruned of cells that do
/// not face the outside, and what remains is validated as a circuit.
pub fn innermost_circuit(cfg: &Configuration, r: u32) -> Option<Circuit> {
    let ball = cfg.ball();
    if ball.kind() != LatticeKind::Hex || r + 1 > ball.radius() {
        return None;
    }
    let big_r = ball.radius();
    let n = ball.len();

    let mut in_c = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    for i in 0..n as u32 {
        if ball.dist(i) <= r {
            in_c[i as usize] = true;
            stack.push(i);
        }
    }
    while let Some(v) = stack.pop() {
        for &w in ball.nbrs(v) {
            if w != NONE && !in_c[w as usize] && !cfg.get(w) {
                if ball.dist(w) == big_r {
                    return None;
                }
                in_c[w as usize] = true;
                stack.push(w);
            }
        }
    }

    // Everything not reachable from the outside without crossing C.
    let outside = |blocked: &[bool]| {
        let mut seen = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        for &i in ball.sphere(big_r) {
            if !blocked[i as usize] {
                seen[i as usize] = true;
                stack.push(i);
            }
        }
        while let Some(v) = stack.pop() {
            for &w in ball.nbrs(v) {
                if w != NONE && !blocked[w as usize] && !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    let e0 = outside(&in_c);
    let mut fill: Vec<bool> = e0.iter().map(|&e| !e).collect();

    let mut layer: Vec<u32>;
    loop {
        layer = (0..n as u32)
            .filter(|&i| !fill[i as usize] && ball.nbrs(i).iter().any(|&w| w != NONE && fill[w as usize]))
            .collect();
        let mut blocked = fill.clone();
        layer.iter().for_each(|&i| blocked[i as usize] = true);
        let v = outside(&blocked);
        let mut changed = false;
        for &w in &layer {
            let faces_out = ball.dist(w) == big_r || ball.nbrs(w).iter().any(|&x| x != NONE && v[x as usize]);
            if !faces_out {
                fill[w as usize] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    if layer.iter().any(|&i| !cfg.get(i)) {
        return None;
    }
    let cells: BTreeSet<_> = layer.iter().map(|&i| ball.cell(i)).collect();
    let ordered = order_cycle(&cells)?;
    let circuit = validate_circuit(&ordered).ok()?;
    circuit.encloses_ball(r).then_some(circuit)
}
