//! Max-parity games solved by recursive attractor decomposition.

/// Eve wins plays whose highest infinitely recurring priority is even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }

    fn of_priority(p: usize) -> Player {
        if p.is_multiple_of(2) {
            Player::Eve
        } else {
            Player::Adam
        }
    }
}

/// Winner of every node. Every node must have at least one successor.
pub fn solve_parity(owner: &[Player], priority: &[usize], succ: &[Vec<usize>]) -> Vec<Player> {
    let n = owner.len();
    let mut pred = vec![Vec::new(); n];
    for (v, ss) in succ.iter().enumerate() {
        assert!(!ss.is_empty(), "node {v} has no successor");
        for &w in ss {
            pred[w].push(v);
        }
    }
    let g = Game { owner, priority, succ, pred: &pred };
    let alive = vec![true; n];
    let (w_eve, _) = g.zielonka(&alive);
    w_eve
        .into_iter()
        .map(|e| if e { Player::Eve } else { Player::Adam })
        .collect()
}

struct Game<'a> {
    owner: &'a [Player],
    priority: &'a [usize],
    succ: &'a [Vec<usize>],
    pred: &'a [Vec<usize>],
}

impl Game<'_> {
    /// Nodes of `alive` from which `player` can force a visit to `target`.
    fn attractor(&self, alive: &[bool], target: &[bool], player: Player) -> Vec<bool> {
        let n = alive.len();
        let mut attr = target.to_vec();
        let mut count: Vec<usize> = (0..n)
            .map(|v| {
                if alive[v] {
                    self.succ[v].iter().filter(|&&w| alive[w]).count()
                } else {
                    0
                }
            })
            .collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| attr[v]).collect();
        while let Some(w) = queue.pop() {
            for &v in &self.pred[w] {
                if !alive[v] || attr[v] {
                    continue;
                }
                if self.owner[v] == player {
                    attr[v] = true;
                    queue.push(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        attr[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        attr
    }

    /// Winning regions `(Eve, Adam)` of the subgame on `alive`.
    fn zielonka(&self, alive: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let n = alive.len();
        let Some(p) = (0..n).filter(|&v| alive[v]).map(|v| self.priority[v]).max() else {
            return (vec![false; n], vec![false; n]);
        };
        let me = Player::of_priority(p);
        let top: Vec<bool> = (0..n).map(|v| alive[v] && self.priority[v] == p).collect();
        let a = self.attractor(alive, &top, me);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
        let (w_eve, w_adam) = self.zielonka(&rest);
        let w_opp = if me == Player::Eve { &w_adam } else { &w_eve };
        if !w_opp.iter().any(|&x| x) {
            let all = alive.to_vec();
            return match me {
                Player::Eve => (all, vec![false; n]),
                Player::Adam => (vec![false; n], all),
            };
        }
        let b = self.attractor(alive, w_opp, me.opponent());
        let rest2: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
        let (mut e2, mut a2) = self.zielonka(&rest2);
        let grow = if me == Player::Eve { &mut a2 } else { &mut e2 };
        for v in 0..n {
            if b[v] {
                grow[v] = true;
            }
        }
        (e2, a2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_loops() {
        let w = solve_parity(&[Player::Eve], &[0], &[vec![0]]);
        assert_eq!(w, vec![Player::Eve]);
        let w = solve_parity(&[Player::Eve], &[1], &[vec![0]]);
        assert_eq!(w, vec![Player::Adam]);
    }

    #[test]
    fn eve_chooses_even_cycle() {
        // 0 (Eve) -> 1 (prio 1 loop) or 2 (prio 2 loop)
        let owner = [Player::Eve, Player::Adam, Player::Adam];
        let prio = [0, 1, 2];
        let succ = vec![vec![1, 2], vec![1], vec![2]];
        let w = solve_parity(&owner, &prio, &succ);
        assert_eq!(w, vec![Player::Eve, Player::Adam, Player::Eve]);
        let owner = [Player::Adam, Player::Adam, Player::Adam];
        let w = solve_parity(&owner, &prio, &succ);
        assert_eq!(w[0], Player::Adam);
    }

    #[test]
    fn highest_recurring_priority_decides() {
        // cycle 0 -> 1 -> 0 with priorities 3 and 4: max recurring is 4
        let owner = [Player::Adam, Player::Adam];
        let w = solve_parity(&owner, &[3, 4], &[vec![1], vec![0]]);
        assert_eq!(w, vec![Player::Eve, Player::Eve]);
    }
}
