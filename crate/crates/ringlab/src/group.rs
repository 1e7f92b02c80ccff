//! Finite groups as Cayley tables, with the presets the harness uses.

use std::sync::Arc;

/// A finite group given by its full multiplication table.
///
/// Index 0 is always the identity. `table[i][j]` is the index of the
/// product of element `i` by element `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    pub name: String,
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
    /// Element names used in group-ring literals, e.g. `e, r, r2, s, sr, sr2`.
    pub element_names: Vec<String>,
    /// Declared flag for the presets; custom tables get `None`.
    pub nilpotent: Option<bool>,
}

impl GroupTable {
    fn build(
        name: &str,
        table: Vec<Vec<usize>>,
        element_names: Vec<String>,
        nilpotent: Option<bool>,
    ) -> Arc<GroupTable> {
        let order = table.len();
        let mut inverse = vec![usize::MAX; order];
        for i in 0..order {
            for j in 0..order {
                if table[i][j] == 0 {
                    inverse[i] = j;
                }
            }
        }
        let g = GroupTable {
            name: name.to_string(),
            order,
            table,
            inverse,
            element_names,
            nilpotent,
        };
        g.validate().expect("preset group table must be a group");
        Arc::new(g)
    }

    /// Exhaustively verifies the group axioms: identity at index 0,
    /// two-sided inverses, associativity, and table index bounds.
    pub fn validate(&self) -> Result<(), String> {
        let k = self.order;
        if k == 0 {
            return Err("group order must be positive".into());
        }
        if self.table.len() != k || self.table.iter().any(|row| row.len() != k) {
            return Err("Cayley table is not square".into());
        }
        if self.element_names.len() != k || self.inverse.len() != k {
            return Err("name or inverse table has wrong length".into());
        }
        for row in &self.table {
            if row.iter().any(|&v| v >= k) {
                return Err("Cayley table entry out of range".into());
            }
        }
        for i in 0..k {
            if self.table[0][i] != i || self.table[i][0] != i {
                return Err("index 0 is not a two-sided identity".into());
            }
            let inv = self.inverse[i];
            if inv >= k || self.table[i][inv] != 0 || self.table[inv][i] != 0 {
                return Err(format!("element {i} has no two-sided inverse"));
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]] {
                        return Err(format!("associativity fails at ({a},{b},{c})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Indices of the elements commuting with the whole group.
    pub fn center(&self) -> Vec<usize> {
        (0..self.order)
            .filter(|&i| (0..self.order).all(|j| self.table[i][j] == self.table[j][i]))
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.center().len() == self.order
    }

    /// Cyclic group of order `n` with elements `g0..g{n-1}`, `g0` the identity.
    pub fn cyclic(n: usize) -> Arc<GroupTable> {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        let names = (0..n).map(|i| format!("g{i}")).collect();
        Self::build(&format!("C{n}"), table, names, Some(true))
    }

    /// Direct product of two cyclic groups, elements `a{i}b{j}`.
    pub fn cyclic_product(n: usize, m: usize) -> Arc<GroupTable> {
        let idx = |i: usize, j: usize| i * m + j;
        let mut table = vec![vec![0; n * m]; n * m];
        let mut names = vec![String::new(); n * m];
        for i in 0..n {
            for j in 0..m {
                names[idx(i, j)] = format!("a{i}b{j}");
                for p in 0..n {
                    for q in 0..m {
                        table[idx(i, j)][idx(p, q)] = idx((i + p) % n, (j + q) % m);
                    }
                }
            }
        }
        Self::build(&format!("C{n}xC{m}"), table, names, Some(true))
    }

    /// Symmetric group on three letters: `e, r, r2, s, sr, sr2` with
    /// `r^3 = s^2 = e` and `s r s = r^-1`. Index of `s^b r^a` is `3b + a`.
    pub fn s3() -> Arc<GroupTable> {
        let idx = |b: usize, a: usize| 3 * b + a;
        let mut table = vec![vec![0; 6]; 6];
        for b1 in 0..2 {
            for a1 in 0..3 {
                for b2 in 0..2 {
                    for a2 in 0..3 {
                        // (s^b1 r^a1)(s^b2 r^a2) = s^(b1+b2) r^(±a1 + a2)
                        let a = if b2 == 1 { (3 - a1) % 3 } else { a1 };
                        table[idx(b1, a1)][idx(b2, a2)] = idx((b1 + b2) % 2, (a + a2) % 3);
                    }
                }
            }
        }
        let names = ["e", "r", "r2", "s", "sr", "sr2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self::build("S3", table, names, Some(false))
    }

    /// Dihedral group of order 8: `e, r, r2, r3, s, rs, r2s, r3s` with
    /// `r^4 = s^2 = e` and `s r s = r^-1`. Index of `r^a s^b` is `4b + a`.
    pub fn d4() -> Arc<GroupTable> {
        let idx = |a: usize, b: usize| 4 * b + a;
        let mut table = vec![vec![0; 8]; 8];
        for a1 in 0..4 {
            for b1 in 0..2 {
                for a2 in 0..4 {
                    for b2 in 0..2 {
                        // (r^a1 s^b1)(r^a2 s^b2) = r^(a1 ± a2) s^(b1+b2)
                        let a2s = if b1 == 1 { (4 - a2) % 4 } else { a2 };
                        table[idx(a1, b1)][idx(a2, b2)] = idx((a1 + a2s) % 4, (b1 + b2) % 2);
                    }
                }
            }
        }
        let names = ["e", "r", "r2", "r3", "s", "rs", "r2s", "r3s"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self::build("D4", table, names, Some(true))
    }

    /// Quaternion group: `1, i, j, k, -1, -i, -j, -k`. Index is
    /// `4s + b` for sign `s` and basis `b` in `(1, i, j, k)`.
    pub fn q8() -> Arc<GroupTable> {
        // basis products with signs: (1,i,j,k) x (1,i,j,k)
        const BASIS: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let mut table = vec![vec![0; 8]; 8];
        for s1 in 0..2 {
            for b1 in 0..4 {
                for s2 in 0..2 {
                    for b2 in 0..4 {
                        let (sp, bp) = BASIS[b1][b2];
                        let sign = (s1 + s2 + sp) % 2;
                        table[4 * s1 + b1][4 * s2 + b2] = 4 * sign + bp;
                    }
                }
            }
        }
        let names = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self::build("Q8", table, names, Some(true))
    }

    /// Parses a custom Cayley table: first line the order `k`, then `k`
    /// lines of `k` space-separated 0-based indices; identity must be
    /// index 0. The table is fully validated.
    pub fn from_table_text(name: &str, text: &str) -> Result<Arc<GroupTable>, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let order: usize = lines
            .next()
            .ok_or("empty group file")?
            .trim()
            .parse()
            .map_err(|_| "first line must be the group order")?;
        if order == 0 || order > 256 {
            return Err("group order out of range 1..=256".into());
        }
        let mut table = Vec::with_capacity(order);
        for _ in 0..order {
            let line = lines.next().ok_or("missing Cayley table row")?;
            let row: Result<Vec<usize>, _> =
                line.split_whitespace().map(|t| t.parse::<usize>()).collect();
            let row = row.map_err(|_| "Cayley table entries must be 0-based indices")?;
            if row.len() != order {
                return Err("Cayley table row has wrong length".into());
            }
            table.push(row);
        }
        let mut inverse = vec![usize::MAX; order];
        for i in 0..order {
            for j in 0..order {
                if table[i][j] == 0 {
                    inverse[i] = j;
                }
            }
        }
        let g = GroupTable {
            name: name.to_string(),
            order,
            table,
            inverse,
            element_names: (0..order).map(|i| format!("g{i}")).collect(),
            nilpotent: None,
        };
        g.validate()?;
        Ok(Arc::new(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_groups() {
        for g in [
            GroupTable::cyclic(1),
            GroupTable::cyclic(2),
            GroupTable::cyclic(6),
            GroupTable::cyclic_product(2, 2),
            GroupTable::cyclic_product(2, 3),
            GroupTable::s3(),
            GroupTable::d4(),
            GroupTable::q8(),
        ] {
            assert_eq!(g.validate(), Ok(()), "{} fails group axioms", g.name);
        }
    }

    #[test]
    fn centers_of_presets() {
        assert_eq!(GroupTable::s3().center(), vec![0]);
        assert_eq!(GroupTable::q8().center().len(), 2);
        assert!(GroupTable::q8().center().contains(&4)); // -1
        assert_eq!(GroupTable::d4().center(), vec![0, 2]); // e, r2
        assert_eq!(GroupTable::cyclic(4).center().len(), 4);
    }

    #[test]
    fn q8_and_d4_are_nonabelian_of_order_8() {
        for g in [GroupTable::q8(), GroupTable::d4()] {
            assert_eq!(g.order, 8);
            assert!(!g.is_abelian());
            assert_eq!(g.center().len(), 2);
        }
    }

    #[test]
    fn q8_relations() {
        let g = GroupTable::q8();
        let (i, j, k, minus1) = (1, 2, 3, 4);
        assert_eq!(g.table[i][i], minus1);
        assert_eq!(g.table[j][j], minus1);
        assert_eq!(g.table[k][k], minus1);
        assert_eq!(g.table[i][j], k);
        assert_eq!(g.table[j][i], 4 + 3); // -k
    }

    #[test]
    fn custom_table_roundtrip() {
        let text = "3\n0 1 2\n1 2 0\n2 0 1\n";
        let g = GroupTable::from_table_text("C3custom", text).unwrap();
        assert_eq!(g.order, 3);
        assert_eq!(g.inverse[1], 2);
        assert!(g.is_abelian());
    }

    #[test]
    fn custom_table_rejects_non_group() {
        // row 1 repeats an entry, so 1 has no inverse and 0 is not reached
        let text = "2\n0 1\n1 1\n";
        assert!(GroupTable::from_table_text("bad", text).is_err());
    }
}
