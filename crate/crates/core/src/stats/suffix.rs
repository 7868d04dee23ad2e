//! Suffix array by prefix doubling with counting sorts, and Kasai's LCP.

/// Sorted suffix start positions of `s` (non-empty suffixes only).
pub(crate) fn suffix_array(s: &[u32], d: usize) -> Vec<u32> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<usize> = Vec::with_capacity(n);
    let mut rank: Vec<usize> = s.iter().map(|&c| c as usize).collect();
    let mut classes = d.max(1);

    // Initial order by first symbol.
    let mut bucket = vec![0usize; classes + 1];
    for &c in &rank {
        bucket[c + 1] += 1;
    }
    for i in 1..bucket.len() {
        bucket[i] += bucket[i - 1];
    }
    sa.resize(n, 0);
    for (i, &c) in rank.iter().enumerate() {
        sa[bucket[c]] = i;
        bucket[c] += 1;
    }
    // Re-rank densely so that `classes` counts distinct symbols.
    let mut tmp = vec![0usize; n];
    tmp[sa[0]] = 0;
    for r in 1..n {
        tmp[sa[r]] = tmp[sa[r - 1]] + usize::from(s[sa[r]] != s[sa[r - 1]]);
    }
    std::mem::swap(&mut rank, &mut tmp);
    classes = rank[sa[n - 1]] + 1;

    let mut second = vec![0usize; n];
    let mut h = 1;
    while classes < n {
        // Order by second key: suffixes without a partner at +h come first.
        let mut p = 0;
        for i in n - h..n {
            second[p] = i;
            p += 1;
        }
        for &j in &sa {
            if j >= h {
                second[p] = j - h;
                p += 1;
            }
        }
        // Stable counting sort by first key.
        let mut count = vec![0usize; classes + 1];
        for &r in &rank {
            count[r + 1] += 1;
        }
        for i in 1..count.len() {
            count[i] += count[i - 1];
        }
        for &i in &second {
            let r = rank[i];
            sa[count[r]] = i;
            count[r] += 1;
        }
        let key = |i: usize| (rank[i], if i + h < n { rank[i + h] as isize } else { -1 });
        tmp[sa[0]] = 0;
        for r in 1..n {
            tmp[sa[r]] = tmp[sa[r - 1]] + usize::from(key(sa[r]) != key(sa[r - 1]));
        }
        std::mem::swap(&mut rank, &mut tmp);
        classes = rank[sa[n - 1]] + 1;
        h *= 2;
    }
    sa.into_iter().map(|i| i as u32).collect()
}

/// `lcp[r]` is the longest common prefix of suffixes `sa[r-1]` and `sa[r]`;
/// `lcp[0] = 0`.
pub(crate) fn lcp_array(s: &[u32], sa: &[u32]) -> Vec<u32> {
    let n = s.len();
    let mut rank = vec![0usize; n];
    for (r, &p) in sa.iter().enumerate() {
        rank[p as usize] = r;
    }
    let mut lcp = vec![0u32; n];
    let mut k = 0usize;
    for i in 0..n {
        if rank[i] == 0 {
            k = 0;
            continue;
        }
        let j = sa[rank[i] - 1] as usize;
        while i + k < n && j + k < n && s[i + k] == s[j + k] {
            k += 1;
        }
        lcp[rank[i]] = k as u32;
        k = k.saturating_sub(1);
    }
    lcp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_sa(s: &[u32]) -> Vec<u32> {
        let mut sa: Vec<u32> = (0..s.len() as u32).collect();
        sa.sort_by(|&a, &b| s[a as usize..].cmp(&s[b as usize..]));
        sa
    }

    #[test]
    fn banana() {
        // b=1 a=0 n=2
        let s = [1, 0, 2, 0, 2, 0];
        let sa = suffix_array(&s, 3);
        assert_eq!(sa, vec![5, 3, 1, 0, 4, 2]);
        assert_eq!(lcp_array(&s, &sa), vec![0, 1, 3, 0, 0, 2]);
    }

    #[test]
    fn degenerate() {
        assert!(suffix_array(&[], 2).is_empty());
        assert_eq!(suffix_array(&[1], 2), vec![0]);
        assert_eq!(suffix_array(&[0, 0, 0, 0], 2), vec![3, 2, 1, 0]);
        assert_eq!(lcp_array(&[0, 0, 0, 0], &[3, 2, 1, 0]), vec![0, 1, 2, 3]);
    }

    proptest! {
        #[test]
        fn matches_naive(s in proptest::collection::vec(0u32..4, 0..200)) {
            let sa = suffix_array(&s, 4);
            prop_assert_eq!(&sa, &naive_sa(&s));
            let lcp = lcp_array(&s, &sa);
            for r in 1..s.len() {
                let (a, b) = (&s[sa[r - 1] as usize..], &s[sa[r] as usize..]);
                let l = a.iter().zip(b).take_while(|(x, y)| x == y).count();
                prop_assert_eq!(lcp[r] as usize, l);
            }
        }
    }
}
