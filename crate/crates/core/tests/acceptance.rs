//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::{BTreeSet, VecDeque};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textbin::compare::{acceptance_corpus, compare_dir, write_corpus, Comparison};
use textbin::edge_boxes::{containment_filter, label_components, EdgeBox, RejectReason};
use textbin::edge_detect::{extract_edges, iterative_threshold};
use textbin::preprocess::{enhance_contrast, entropy, extend_grayscale, smooth, SmoothingMask};
use textbin::sliding::{uniformity_threshold, DifferenceThreshold};
use textbin::{BinaryImage, GrayImage, Histogram, Method, PipelineConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

// ---- 1. labeling ----

fn bfs_labels(img: &BinaryImage) -> Vec<u32> {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if !img.data()[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if img.data()[j] && labels[j] == 0 {
                        labels[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    labels
}

/// Pixel sets of each component, independent of label numbering.
fn partition(labels: &[u32]) -> BTreeSet<Vec<usize>> {
    let n = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut sets = vec![Vec::new(); n + 1];
    for (i, &l) in labels.iter().enumerate() {
        sets[l as usize].push(i);
    }
    sets.into_iter().skip(1).filter(|s| !s.is_empty()).collect()
}

fn labeling() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..200 {
        let density: f64 = rng.random_range(0.05..0.7);
        let img = BinaryImage::from_fn(32, 32, |_, _| rng.random_bool(density));
        let got = label_components(&img);
        let want = bfs_labels(&img);
        ensure(partition(&got.labels) == partition(&want), || {
            format!("case {case}: partitions differ")
        })?;
        ensure(got.boxes.len() == partition(&want).len(), || {
            format!("case {case}: box count")
        })?;
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "200 images in {:.3}s",
        start.elapsed().as_secs_f64()
    ))
}

// ---- 2. Otsu ----

/// Argmax over t of `(n0 S1 - n1 S0)^2 / (n0 n1)`, compared exactly by cross-multiplication.
fn otsu_oracle(bins: &[u64; 256]) -> u8 {
    let mut best_t = 0u8;
    let mut best: Option<(u128, u128)> = None;
    for t in 1..=255usize {
        let (n0, s0) = bins[..t]
            .iter()
            .enumerate()
            .fold((0u128, 0u128), |(n, s), (v, &c)| {
                (n + c as u128, s + v as u128 * c as u128)
            });
        let (n1, s1) = bins[t..]
            .iter()
            .enumerate()
            .fold((0u128, 0u128), |(n, s), (v, &c)| {
                (n + c as u128, s + (v + t) as u128 * c as u128)
            });
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (n0 * s1).abs_diff(n1 * s0);
        let (num, den) = (d * d, n0 * n1);
        let better = match best {
            None => num > 0,
            Some((bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((num, den));
            best_t = t as u8;
        }
    }
    best_t
}

fn otsu() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..100 {
        let mut bins = [0u64; 256];
        let occupied = rng.random_range(1..=256);
        for _ in 0..occupied {
            bins[rng.random_range(0..256)] += rng.random_range(1..40);
        }
        let got = textbin::baselines::otsu_threshold(&Histogram::from_bins(bins));
        let want = otsu_oracle(&bins);
        ensure(got == want, || {
            format!("case {case}: got {got}, oracle {want}")
        })?;
    }
    Ok("100 histograms".into())
}

// ---- 3. iterative threshold ----

fn isodata_oracle(img: &GrayImage) -> (f64, usize) {
    let px: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let lo = px.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = px.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut t = (lo + hi) / 2.0;
    for k in 1..=256 {
        let (low, high): (Vec<f64>, Vec<f64>) = px.iter().partition(|&&v| v < t);
        let mean = |c: &[f64]| {
            if c.is_empty() {
                t
            } else {
                c.iter().sum::<f64>() / c.len() as f64
            }
        };
        let next = (mean(&low) + mean(&high)) / 2.0;
        let delta = (next - t).abs();
        t = next;
        if delta < 0.5 {
            return (t, k);
        }
    }
    (t, 256)
}

fn iterative() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut images: Vec<GrayImage> = (0..100)
        .map(|_| {
            let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
            let lo = rng.random_range(0..=255u8);
            let hi = rng.random_range(lo..=255u8);
            GrayImage::from_fn(w, h, |_, _| rng.random_range(lo..=hi))
        })
        .collect();
    images.push(GrayImage::filled(16, 16, 77));
    images.push(GrayImage::from_fn(
        16,
        16,
        |x, _| if x < 8 { 50 } else { 200 },
    ));

    let mut worst = 0.0f64;
    for (case, img) in images.iter().enumerate() {
        let got = iterative_threshold(img);
        let (want, _) = isodata_oracle(img);
        ensure(got.iterations <= 256, || {
            format!("case {case}: {} iterations", got.iterations)
        })?;
        let err = (got.threshold - want).abs();
        worst = worst.max(err);
        ensure(err <= 0.5, || {
            format!("case {case}: {} vs oracle {want}", got.threshold)
        })?;
    }
    let two_level = iterative_threshold(images.last().unwrap()).threshold;
    ensure(two_level == 125.0, || {
        format!("{{50,200}} gave {two_level}")
    })?;
    Ok(format!(
        "102 images, max deviation {worst:.3}, two-level = 125"
    ))
}

// ---- 4. edge rings ----

fn rings() -> Outcome {
    for w in 3..=20 {
        for h in 3..=20 {
            let (x0, y0) = (5, 6);
            let inside =
                |x: usize, y: usize| (x0..x0 + w).contains(&x) && (y0..y0 + h).contains(&y);
            let img = GrayImage::from_fn(32, 32, |x, y| if inside(x, y) { 230 } else { 25 });
            let ring = BinaryImage::from_fn(32, 32, |x, y| {
                inside(x, y) && (x == x0 || y == y0 || x == x0 + w - 1 || y == y0 + h - 1)
            });
            ensure(extract_edges(&img) == ring, || format!("{w}x{h} rectangle"))?;
        }
    }
    Ok("324 rectangles".into())
}

// ---- 5. nesting ----

fn frame(label: u32, x0: usize, y0: usize, x1: usize, y1: usize) -> EdgeBox {
    EdgeBox {
        label,
        x_min: x0,
        y_min: y0,
        x_max: x1,
        y_max: y1,
        pixel_count: 2 * (x1 - x0 + y1 - y0),
    }
}

/// Outer frame label 1 with `k` disjoint inner boxes laid out in a row.
fn nested(k: usize) -> Vec<EdgeBox> {
    let mut boxes = vec![frame(1, 0, 0, 10 * k + 10, 30)];
    for i in 0..k {
        let x = 5 + 10 * i;
        boxes.push(frame(2 + i as u32, x, 10, x + 6, 20));
    }
    boxes
}

fn labels_of(boxes: &[EdgeBox]) -> BTreeSet<u32> {
    boxes.iter().map(|b| b.label).collect()
}

fn nesting() -> Outcome {
    for k in 1..=4 {
        let boxes = nested(k);
        let out = containment_filter(&boxes);
        let inner: BTreeSet<u32> = (2..2 + k as u32).collect();
        let (kept, rejected) = if k <= 2 {
            (BTreeSet::from([1]), inner)
        } else {
            (inner, BTreeSet::from([1]))
        };
        let got_rejected: BTreeSet<u32> = out.rejected.iter().map(|(b, _)| b.label).collect();
        ensure(
            labels_of(&out.kept) == kept && got_rejected == rejected,
            || {
                format!(
                    "{k} inside 1: kept {:?}, rejected {got_rejected:?}",
                    labels_of(&out.kept)
                )
            },
        )?;
        for (b, reason) in &out.rejected {
            let ok = match reason {
                RejectReason::InnerBoundary { container } => {
                    k <= 2 && *container == 1 && b.label != 1
                }
                RejectReason::Container { enclosed } => k >= 3 && *enclosed == k && b.label == 1,
                RejectReason::AspectRatio { .. } => false,
            };
            ensure(ok, || {
                format!("{k} inside 1: box {} rejected as {reason:?}", b.label)
            })?;
        }
    }
    Ok("1, 2, 3 and 4 inside 1".into())
}

// ---- 6. sliding window ----

/// Every window has its left member as anchor; windows are maximal runs and
/// the next window starts right after. Enumerating all cut sets and keeping
/// the ones that satisfy both properties yields the scan's partition.
fn brute_force_partition(sorted: &[f64], th: f64) -> (Vec<(usize, usize)>, f64) {
    let n = sorted.len();
    let mut found = None;
    for cuts in 0u32..1 << (n - 1) {
        let mut runs = Vec::new();
        let mut start = 0;
        for i in 0..n {
            if i == n - 1 || cuts & (1 << i) != 0 {
                runs.push((start, i));
                start = i + 1;
            }
        }
        let ok = runs.iter().all(|&(s, e)| {
            let fits = |j: usize| sorted[j] - sorted[s] <= th * sorted[s];
            (s..=e).all(fits) && (e + 1 >= n || !fits(e + 1))
        });
        if ok {
            assert!(found.is_none(), "partition is not unique");
            found = Some(runs);
        }
    }
    let runs = found.expect("some partition satisfies the rules");
    let t_s = runs
        .iter()
        .filter(|(s, e)| e > s)
        .map(|&(s, _)| sorted[s])
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
        .unwrap_or(0.0);
    (runs, t_s)
}

fn sliding() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let th = 0.2;
    for case in 0..10_000 {
        let n = rng.random_range(1..=8);
        let sizes: Vec<f64> = (0..n).map(|_| rng.random_range(1..=20) as f64).collect();
        let got = uniformity_threshold(&sizes, DifferenceThreshold::Relative(th))
            .map_err(|e| e.to_string())?;
        let mut sorted = sizes.clone();
        sorted.sort_by(f64::total_cmp);
        let (runs, t_s) = brute_force_partition(&sorted, th);
        let got_runs: Vec<(usize, usize)> = got
            .windows
            .iter()
            .map(|w| (w.start_index, w.end_index))
            .collect();
        ensure(got_runs == runs && got.t_s == t_s, || {
            format!(
                "case {case} {sizes:?}: windows {got_runs:?} t_s {} vs {runs:?} {t_s}",
                got.t_s
            )
        })?;
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "10000 lists in {:.3}s",
        start.elapsed().as_secs_f64()
    ))
}

// ---- 7 and 8. corpus ----

fn run_corpus() -> Result<(Comparison, String), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_corpus(dir.path(), &acceptance_corpus()).map_err(|e| e.to_string())?;
    let cmp = compare_dir(dir.path(), &PipelineConfig::default(), &Method::ALL)
        .map_err(|e| e.to_string())?;
    let csv = cmp.to_csv();
    Ok((cmp, csv))
}

fn benchmark() -> Outcome {
    let start = Instant::now();
    let (cmp, _) = run_corpus()?;
    let elapsed = start.elapsed();
    ensure(cmp.rows_for(Method::Sliding).count() == 12, || {
        "expected 12 images".into()
    })?;
    let mean = cmp.mean(Method::Sliding).f_measure;
    ensure(mean >= 0.90, || format!("mean F {mean:.4} < 0.90"))?;
    let mut min_margin = f64::INFINITY;
    for row in cmp.rows_for(Method::Sliding) {
        if !(row.image.starts_with("checker") || row.image.starts_with("noise")) {
            continue;
        }
        let otsu = cmp
            .row(&row.image, Method::Otsu)
            .expect("otsu row")
            .f_measure;
        let margin = row.f_measure - otsu;
        min_margin = min_margin.min(margin);
        ensure(margin >= 0.10, || {
            format!(
                "{}: sliding {:.4} vs otsu {otsu:.4}",
                row.image, row.f_measure
            )
        })?;
    }
    within(elapsed, 30.0)?;
    Ok(format!(
        "mean F {mean:.4}, min margin over Otsu on textured images {min_margin:.4}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn determinism() -> Outcome {
    let (_, a) = run_corpus()?;
    let (_, b) = run_corpus()?;
    ensure(a == b, || "CSV differs between runs".into())?;
    Ok(format!("{} bytes identical", a.len()))
}

// ---- 9. preprocess ----

fn preprocess_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mask = SmoothingMask::default();
    for case in 0..500 {
        let (w, h) = (rng.random_range(1..24), rng.random_range(1..24));
        let lo = rng.random_range(0..=255u8);
        let hi = rng.random_range(lo..=255u8);
        let img = GrayImage::from_fn(w, h, |_, _| rng.random_range(lo..=hi));

        let hist = img.histogram();
        let e = entropy(&hist).map_err(|e| e.to_string())?;
        let occupied = hist.bins().iter().filter(|&&c| c > 0).count();
        ensure(
            (0.0..=8.0).contains(&e) && ((e == 0.0) == (occupied == 1)),
            || format!("case {case}: entropy {e} with {occupied} bins"),
        )?;

        let steep = rng.random_range(1.0..40.0);
        let c = enhance_contrast(&img, steep);
        for (i, &a) in img.data().iter().enumerate() {
            for (j, &b) in img.data().iter().enumerate().step_by(7) {
                ensure(a > b || c.data()[i] <= c.data()[j], || {
                    format!("case {case}: contrast not monotone")
                })?;
            }
        }

        let s = smooth(&img, &mask);
        let (mn, mx) = img.min_max();
        ensure(s.data().iter().all(|&v| mn <= v && v <= mx), || {
            format!("case {case}: smoothing left range")
        })?;

        let gap = rng.random_range(1..=255u32);
        let x = extend_grayscale(&img, gap);
        let span = (mx - mn) as u32;
        if span > 0 && span < gap {
            ensure(x.min_max() == (0, 255), || {
                format!("case {case}: span {:?}", x.min_max())
            })?;
        } else {
            ensure(x == img, || {
                format!("case {case}: extension should not fire")
            })?;
        }
        ensure(extend_grayscale(&x, gap) == x, || {
            format!("case {case}: not idempotent")
        })?;
    }
    Ok("500 images".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("labeling matches BFS flood fill", labeling),
        ("Otsu matches exhaustive search", otsu),
        ("iterative threshold converges to oracle", iterative),
        ("solid rectangles give one-pixel rings", rings),
        ("nested box fixtures", nesting),
        ("sliding window matches brute force", sliding),
        ("synthetic benchmark", benchmark),
        ("benchmark CSV is deterministic", determinism),
        ("preprocess invariants", preprocess_invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
