use crate::model::{for_each_assignment, PotentialTable};

/// Groups argument positions that can be swapped without changing the table.
///
/// Returns one tag per position: the smallest position of its class. Two
/// positions share a class when their ranges have equal size and the
/// transposition leaves every entry unchanged (within `tolerance`). Invariance
/// under transpositions is closed under composition, so the classes are
/// exactly the orbits of the table's argument-symmetry group restricted to
/// transpositions.
pub fn argument_symmetry_classes(table: &PotentialTable, tolerance: f64) -> Vec<usize> {
    let arity = table.arity();
    let mut parent: Vec<usize> = (0..arity).collect();
    for p in 0..arity {
        for q in p + 1..arity {
            if find(&mut parent, p) == find(&mut parent, q) {
                continue;
            }
            if swap_invariant(table, p, q, tolerance) {
                let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
                parent[rp.max(rq)] = rp.min(rq);
            }
        }
    }
    (0..arity).map(|p| find(&mut parent, p)).collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn swap_invariant(table: &PotentialTable, p: usize, q: usize, tolerance: f64) -> bool {
    let sizes = table.range_sizes();
    if sizes[p] != sizes[q] {
        return false;
    }
    let mut ok = true;
    let mut swapped = vec![0; sizes.len()];
    for_each_assignment(sizes, |a| {
        if !ok || a[p] <= a[q] {
            return;
        }
        swapped.copy_from_slice(a);
        swapped.swap(p, q);
        let (x, y) = (table.value(a), table.value(&swapped));
        if x != y && (x - y).abs() > tolerance {
            ok = false;
        }
    });
    ok
}
