use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// User-item interactions split into train, dev and test lists. Users and
/// items have separate compact id ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSet {
    num_users: usize,
    num_items: usize,
    train: Vec<(usize, usize)>,
    dev: Vec<(usize, usize)>,
    test: Vec<(usize, usize)>,
    /// Sorted, deduplicated items per user over all three splits.
    interacted: Vec<Vec<usize>>,
}

impl InteractionSet {
    pub fn new(
        num_users: usize,
        num_items: usize,
        train: Vec<(usize, usize)>,
        dev: Vec<(usize, usize)>,
        test: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut interacted = vec![Vec::new(); num_users];
        let mut train_items = vec![Vec::new(); num_users];
        for (name, split) in [("train", &train), ("dev", &dev), ("test", &test)] {
            for &(u, i) in split.iter() {
                if u >= num_users || i >= num_items {
                    return Err(Error::Validation(format!(
                        "{name} pair ({u}, {i}) out of range for {num_users} users, {num_items} items"
                    )));
                }
                interacted[u].push(i);
                if name == "train" {
                    train_items[u].push(i);
                }
            }
        }
        for items in interacted.iter_mut().chain(train_items.iter_mut()) {
            items.sort_unstable();
            items.dedup();
        }
        for (name, split) in [("dev", &dev), ("test", &test)] {
            for &(u, i) in split.iter() {
                if train_items[u].is_empty() {
                    return Err(Error::Validation(format!(
                        "{name} user {u} has no training interactions"
                    )));
                }
                if train_items[u].binary_search(&i).is_ok() {
                    return Err(Error::Validation(format!(
                        "{name} pair ({u}, {i}) also appears in train"
                    )));
                }
            }
        }
        Ok(Self {
            num_users,
            num_items,
            train,
            dev,
            test,
            interacted,
        })
    }

    /// Holds out one random interaction per user for test and one for dev.
    /// Users with fewer than three distinct items keep everything in train.
    pub fn leave_one_out(
        num_users: usize,
        num_items: usize,
        interactions: &[(usize, usize)],
        seed: u64,
    ) -> Result<Self> {
        let mut per_user = vec![Vec::new(); num_users];
        for &(u, i) in interactions {
            if u >= num_users {
                return Err(Error::Validation(format!("user {u} out of range")));
            }
            per_user[u].push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut train, mut dev, mut test) = (Vec::new(), Vec::new(), Vec::new());
        for (u, items) in per_user.iter_mut().enumerate() {
            items.sort_unstable();
            items.dedup();
            items.shuffle(&mut rng);
            let mut rest = &items[..];
            if items.len() >= 3 {
                test.push((u, items[0]));
                dev.push((u, items[1]));
                rest = &items[2..];
            }
            train.extend(rest.iter().map(|&i| (u, i)));
        }
        Self::new(num_users, num_items, train, dev, test)
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn train(&self) -> &[(usize, usize)] {
        &self.train
    }

    pub fn dev(&self) -> &[(usize, usize)] {
        &self.dev
    }

    pub fn test(&self) -> &[(usize, usize)] {
        &self.test
    }

    /// Items `user` interacted with in any split, sorted.
    pub fn interacted(&self, user: usize) -> &[usize] {
        &self.interacted[user]
    }

    pub fn has_interacted(&self, user: usize, item: usize) -> bool {
        self.interacted[user].binary_search(&item).is_ok()
    }
}

/// An interaction set read from disk with the raw ids behind each compact id.
#[derive(Debug, Clone)]
pub struct LoadedInteractions {
    pub set: InteractionSet,
    pub user_names: Vec<String>,
    pub item_names: Vec<String>,
}

pub fn split_paths(prefix: &Path) -> [PathBuf; 3] {
    ["train", "dev", "test"].map(|s| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(format!(".{s}.tsv"));
        PathBuf::from(p)
    })
}

/// Reads `<prefix>.train.tsv`, `<prefix>.dev.tsv` and `<prefix>.test.tsv`.
/// Each line holds a raw user id and item id separated by a TAB; further
/// columns are ignored, as are blank lines and lines starting with `#`.
pub fn load_interactions(prefix: impl AsRef<Path>) -> Result<LoadedInteractions> {
    let paths = split_paths(prefix.as_ref());
    if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
        return Err(Error::InvalidArgument(format!(
            "missing split file {}; a dataset prefix P needs P.train.tsv, P.dev.tsv and \
             P.test.tsv, one TAB-separated `user<TAB>item` pair per line",
            missing.display()
        )));
    }
    let mut users: HashMap<String, usize> = HashMap::new();
    let mut items: HashMap<String, usize> = HashMap::new();
    let mut user_names = Vec::new();
    let mut item_names = Vec::new();
    let mut splits: [Vec<(usize, usize)>; 3] = Default::default();
    for (path, split) in paths.iter().zip(splits.iter_mut()) {
        let text = fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(u), Some(i)) = (fields.next(), fields.next()) else {
                return Err(Error::Parse {
                    path: path.clone(),
                    line: lineno + 1,
                    message: "expected `user<TAB>item`".into(),
                });
            };
            let (u, i) = (u.trim(), i.trim());
            if u.is_empty() || i.is_empty() {
                return Err(Error::Parse {
                    path: path.clone(),
                    line: lineno + 1,
                    message: "empty id".into(),
                });
            }
            let uid = *users.entry(u.to_string()).or_insert_with(|| {
                user_names.push(u.to_string());
                user_names.len() - 1
            });
            let iid = *items.entry(i.to_string()).or_insert_with(|| {
                item_names.push(i.to_string());
                item_names.len() - 1
            });
            split.push((uid, iid));
        }
    }
    let [train, dev, test] = splits;
    let set = InteractionSet::new(user_names.len(), item_names.len(), train, dev, test)?;
    Ok(LoadedInteractions {
        set,
        user_names,
        item_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(InteractionSet::new(2, 2, vec![(0, 0)], vec![], vec![(0, 1)]).is_ok());
        // out of range
        assert!(InteractionSet::new(2, 2, vec![(0, 2)], vec![], vec![]).is_err());
        // test pair also in train
        assert!(InteractionSet::new(2, 2, vec![(0, 0)], vec![], vec![(0, 0)]).is_err());
        // test user without training data
        assert!(InteractionSet::new(2, 2, vec![(0, 0)], vec![], vec![(1, 0)]).is_err());
    }

    #[test]
    fn leave_one_out_split() {
        let data: Vec<(usize, usize)> = (0..5)
            .flat_map(|u| (0..4).map(move |i| (u, i + u)))
            .collect();
        let mut with_short = data.clone();
        with_short.push((5, 0));
        let set = InteractionSet::leave_one_out(6, 10, &with_short, 3).unwrap();
        assert_eq!(set.test().len(), 5);
        assert_eq!(set.dev().len(), 5);
        assert_eq!(set.train().len(), 11);
        assert_eq!(set.interacted(2), &[2, 3, 4, 5]);
        assert!(set.has_interacted(5, 0));
    }

    #[test]
    fn load_round_trip_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("toy");
        let [train, dev, test] = split_paths(&prefix);
        fs::write(&train, "alice\tx\t5\nbob\ty\n# note\n\nalice\ty\n").unwrap();
        fs::write(&dev, "bob\tx\n").unwrap();
        let err = load_interactions(&prefix).unwrap_err().to_string();
        assert!(err.contains("toy.test.tsv"), "{err}");
        assert!(err.contains("TAB"), "{err}");
        fs::write(&test, "alice\tz\n").unwrap();
        let loaded = load_interactions(&prefix).unwrap();
        assert_eq!(loaded.user_names, vec!["alice", "bob"]);
        assert_eq!(loaded.item_names, vec!["x", "y", "z"]);
        assert_eq!(loaded.set.train(), &[(0, 0), (1, 1), (0, 1)]);
        assert_eq!(loaded.set.dev(), &[(1, 0)]);
        assert_eq!(loaded.set.test(), &[(0, 2)]);
    }

    #[test]
    fn malformed_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("bad");
        let [train, dev, test] = split_paths(&prefix);
        fs::write(&train, "a\tb\nonly-one-field\n").unwrap();
        fs::write(&dev, "").unwrap();
        fs::write(&test, "").unwrap();
        match load_interactions(&prefix) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
