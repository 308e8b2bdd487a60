#![allow(dead_code)]

use doctrina::prefix::PrefixAtom;

/// Restricted growth strings of length `k` over at most `letters` values: every assignment
/// of `k` variables into an alphabet of that size, up to permuting the alphabet.
pub fn assignments_up_to_symmetry(k: usize, letters: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for a in &out {
            let used = a.iter().max().map_or(0, |m| m + 1);
            for v in 0..=used.min(letters - 1) {
                let mut b = a.clone();
                b.push(v);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

/// Whether some prefix-closed, extendable language over `letters` letters, truncated at
/// `length`, contains `w` and avoids every word of `banned`, with the part of the
/// language below `w` chosen freely.
fn extendable(w: &mut Vec<usize>, letters: usize, length: usize, banned: &[Vec<usize>]) -> bool {
    if banned.contains(w) {
        return false;
    }
    if w.len() >= length {
        return true;
    }
    for a in 0..letters {
        w.push(a);
        let ok = extendable(w, letters, length, banned);
        w.pop();
        if ok {
            return true;
        }
    }
    false
}

/// Exhaustive word-model search: is `⋀P ∧ ¬⋁N` satisfiable in a language over an alphabet
/// of `k + 1` letters truncated one past the largest arity, under some assignment?
pub fn word_model_satisfiable(k: usize, pos: &[PrefixAtom], neg: &[PrefixAtom]) -> bool {
    let letters = k + 1;
    let length = pos.iter().chain(neg).map(PrefixAtom::arity).max().unwrap_or(0) + 1;
    for sigma in assignments_up_to_symmetry(k, letters) {
        let word = |a: &PrefixAtom| a.args.iter().map(|&i| sigma[i]).collect::<Vec<usize>>();
        let yes: Vec<Vec<usize>> = pos.iter().map(word).collect();
        let no: Vec<Vec<usize>> = neg.iter().map(word).collect();
        let prefix_banned = yes.iter().any(|w| (0..=w.len()).any(|i| no.contains(&w[..i].to_vec())));
        if prefix_banned {
            continue;
        }
        if yes.iter().all(|w| extendable(&mut w.clone(), letters, length, &no)) {
            return true;
        }
    }
    false
}

/// Sets of at most two atoms.
pub fn small_sets(atoms: &[PrefixAtom]) -> Vec<Vec<PrefixAtom>> {
    let mut out = vec![vec![]];
    for (i, a) in atoms.iter().enumerate() {
        out.push(vec![a.clone()]);
        for b in &atoms[i + 1..] {
            out.push(vec![a.clone(), b.clone()]);
        }
    }
    out
}
