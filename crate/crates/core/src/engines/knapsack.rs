//! 0-1 knapsack with the value-scaling FPTAS.
//!
//! Values are exact rationals; they are scaled by `K = delta * v_max / n`,
//! floored to integers, and a min-weight-per-value dynamic program picks the
//! best reachable scaled value. The selection's true value is at least
//! `(1 - delta)` times the optimum over items that fit.

use num_rational::BigRational;
use num_traits::Zero;

use crate::rational::{floor_u64, from_f64};

#[derive(Debug, Clone)]
pub struct KnapsackItem<I> {
    pub id: I,
    /// Degree contribution of the module.
    pub weight: u64,
    /// Scaled diversity `dive / O_max`, non-negative.
    pub value: BigRational,
}

/// Returns the ids of a selection with total weight within `capacity` and
/// total value at least `(1 - delta)` of the optimum. Deterministic: ties in
/// the dynamic program always prefer earlier items.
pub fn delta_kp<I: Clone>(items: &[KnapsackItem<I>], capacity: u64, delta: f64) -> Vec<I> {
    assert!(delta > 0.0 && delta < 1.0, "delta must be in (0,1)");
    let fitting: Vec<&KnapsackItem<I>> = items.iter().filter(|it| it.weight <= capacity).collect();
    if fitting.is_empty() {
        return Vec::new();
    }
    let total_weight: u64 = fitting.iter().map(|it| it.weight).sum();
    if total_weight <= capacity {
        return fitting.iter().map(|it| it.id.clone()).collect();
    }
    let v_max = fitting
        .iter()
        .map(|it| &it.value)
        .max()
        .expect("non-empty");
    if v_max.is_zero() {
        return Vec::new();
    }
    let scale = from_f64(delta) * v_max / BigRational::from_integer(fitting.len().into());
    let scaled: Vec<u64> = fitting
        .iter()
        .map(|it| floor_u64(&(&it.value / &scale)))
        .collect();
    let total_value: u64 = scaled.iter().sum();

    // dp_rows[i][v] = min weight over the first i+1 items reaching scaled
    // value exactly v; u64::MAX marks unreachable.
    let v_len = (total_value + 1) as usize;
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(fitting.len());
    let mut current = vec![u64::MAX; v_len];
    current[0] = 0;
    for (item, &sv) in fitting.iter().zip(&scaled) {
        let mut next = current.clone();
        if sv > 0 {
            for v in (sv as usize)..v_len {
                let prev = current[v - sv as usize];
                if prev != u64::MAX {
                    let w = prev + item.weight;
                    if w < next[v] {
                        next[v] = w;
                    }
                }
            }
        }
        rows.push(next.clone());
        current = next;
    }

    let best_value = (0..v_len)
        .rev()
        .find(|&v| current[v] <= capacity)
        .unwrap_or(0);

    // Walk the rows back to recover which items were taken.
    let mut chosen = Vec::new();
    let mut v = best_value;
    for i in (0..fitting.len()).rev() {
        let above = if i == 0 {
            if v == 0 {
                0
            } else {
                u64::MAX
            }
        } else {
            rows[i - 1][v]
        };
        if rows[i][v] != above {
            chosen.push(fitting[i].id.clone());
            v -= scaled[i] as usize;
        }
    }
    chosen.reverse();
    chosen
}

/// Exact optimum by subset enumeration; test oracle for small inputs.
pub fn brute_force_value<I>(items: &[KnapsackItem<I>], capacity: u64) -> BigRational {
    assert!(items.len() <= 24, "brute force is for desk-scale inputs");
    let mut best = BigRational::zero();
    for mask in 0u32..(1 << items.len()) {
        let mut weight = 0u64;
        let mut value = BigRational::zero();
        for (i, item) in items.iter().enumerate() {
            if mask & (1 << i) != 0 {
                weight += item.weight;
                value += &item.value;
            }
        }
        if weight <= capacity && value > best {
            best = value;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn item(id: usize, weight: u64, value: i64) -> KnapsackItem<usize> {
        KnapsackItem {
            id,
            weight,
            value: ratio(value, 1),
        }
    }

    #[test]
    fn three_item_instance_close_to_optimum() {
        let items = vec![item(0, 2, 3), item(1, 3, 4), item(2, 4, 5)];
        let chosen = delta_kp(&items, 5, 0.1);
        let value: BigRational = chosen.iter().map(|&i| items[i].value.clone()).sum();
        let total_weight: u64 = chosen.iter().map(|&i| items[i].weight).sum();
        assert!(total_weight <= 5);
        // Optimum is {0,1} with value 7; the guarantee is 0.9 * 7.
        assert!(value >= ratio(63, 10));
        assert_eq!(brute_force_value(&items, 5), ratio(7, 1));
    }

    #[test]
    fn zero_capacity_selects_nothing() {
        let items = vec![item(0, 1, 10)];
        assert!(delta_kp(&items, 0, 0.5).is_empty());
    }

    #[test]
    fn single_fitting_item_is_taken() {
        let items = vec![item(0, 3, 10), item(1, 9, 100)];
        assert_eq!(delta_kp(&items, 4, 0.25), vec![0]);
    }

    #[test]
    fn all_fitting_shortcut() {
        let items = vec![item(0, 1, 1), item(1, 1, 1)];
        assert_eq!(delta_kp(&items, 10, 0.1), vec![0, 1]);
    }

    #[test]
    fn zero_weight_items_ride_free() {
        let items = vec![item(0, 0, 2), item(1, 5, 9), item(2, 5, 9)];
        let chosen = delta_kp(&items, 5, 0.1);
        assert!(chosen.contains(&0));
        assert_eq!(chosen.len(), 2);
    }

    #[test]
    fn guarantee_holds_against_brute_force() {
        // A spread of adversarial-ish small instances.
        let cases: Vec<(Vec<KnapsackItem<usize>>, u64)> = vec![
            (
                vec![item(0, 5, 7), item(1, 4, 6), item(2, 3, 5), item(3, 2, 1)],
                9,
            ),
            (
                vec![
                    item(0, 1, 1),
                    item(1, 2, 30),
                    item(2, 3, 17),
                    item(3, 4, 40),
                    item(4, 5, 3),
                ],
                7,
            ),
            ((0..10).map(|i| item(i, (i as u64 % 4) + 1, 13 - i as i64)).collect(), 8),
        ];
        for delta in [0.05, 0.1, 0.3, 0.9] {
            for (items, cap) in &cases {
                let chosen = delta_kp(items, *cap, delta);
                let value: BigRational = chosen.iter().map(|&i| items[i].value.clone()).sum();
                let weight: u64 = chosen.iter().map(|&i| items[i].weight).sum();
                let opt = brute_force_value(items, *cap);
                assert!(weight <= *cap);
                let bound = (ratio(1, 1) - crate::rational::from_f64(delta)) * &opt;
                assert!(
                    value >= bound,
                    "delta={delta} value={value} opt={opt}"
                );
            }
        }
    }
}
