use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Splits `0..len` into at most `workers` contiguous ranges, runs `f` on each
/// (on scoped threads when there is more than one) and returns the results in
/// range order, so any merge done by the caller has a fixed order.
pub(crate) fn map_ranges<R, F>(len: usize, workers: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync,
{
    let workers = workers.max(1).min(len.max(1));
    if workers == 1 {
        return vec![f(0..len)];
    }
    let chunk = len.div_ceil(workers);
    let ranges: Vec<Range<usize>> = (0..workers).map(|w| (w * chunk).min(len)..((w + 1) * chunk).min(len)).collect();
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = ranges.into_iter().map(|r| scope.spawn(move || f(r))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Evaluates `f(0..n)` on up to `jobs` threads pulling indices from a shared
/// counter; results come back in index order.
pub(crate) fn map_indices<R, F>(n: usize, jobs: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let jobs = jobs.max(1).min(n.max(1));
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(i);
                *slots[i].lock().expect("unpoisoned") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("unpoisoned").expect("every index ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_in_order() {
        for workers in 1..6 {
            let parts = map_ranges(11, workers, |r| r.collect::<Vec<_>>());
            assert_eq!(parts.concat(), (0..11).collect::<Vec<_>>());
        }
        assert_eq!(map_ranges(0, 4, |r| r.len()), vec![0]);
    }

    #[test]
    fn indices_keep_order() {
        for jobs in [1, 3, 8] {
            assert_eq!(map_indices(7, jobs, |i| i * i), vec![0, 1, 4, 9, 16, 25, 36]);
        }
    }
}
