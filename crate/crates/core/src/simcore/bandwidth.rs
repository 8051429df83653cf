use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// One unicast transfer competing for link capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub src: usize,
    pub dst: usize,
    /// Extra ceiling for this flow alone, in bits per second.
    pub cap: Option<f64>,
    /// Lower tiers are filled first; higher tiers share what remains.
    pub tier: u8,
}

#[derive(PartialEq)]
struct Level {
    level: f64,
    link: usize,
    version: u32,
}

impl Eq for Level {}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on level, ties to the lower link index.
        other
            .level
            .total_cmp(&self.level)
            .then(other.link.cmp(&self.link))
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Progressive filling over arbitrary links. `flow_links[f]` lists the
/// links flow `f` crosses; `capacity` is consumed in place.
fn water_fill(flow_links: &[Vec<usize>], capacity: &mut [f64]) -> Vec<f64> {
    let links = capacity.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); links];
    for (f, ls) in flow_links.iter().enumerate() {
        for &l in ls {
            members[l].push(f);
        }
    }
    let mut active = vec![0usize; links];
    for l in 0..links {
        active[l] = members[l].len();
    }
    let mut version = vec![0u32; links];
    let mut heap = BinaryHeap::new();
    for l in 0..links {
        if active[l] > 0 {
            heap.push(Level {
                level: capacity[l].max(0.0) / active[l] as f64,
                link: l,
                version: 0,
            });
        }
    }
    let mut rate = vec![0.0; flow_links.len()];
    let mut frozen = vec![false; flow_links.len()];
    while let Some(Level { level, link, version: v }) = heap.pop() {
        if v != version[link] || active[link] == 0 {
            continue;
        }
        for &f in &members[link] {
            if frozen[f] {
                continue;
            }
            frozen[f] = true;
            rate[f] = level;
            for &other in &flow_links[f] {
                capacity[other] -= level;
                active[other] -= 1;
                version[other] += 1;
                if other != link && active[other] > 0 {
                    heap.push(Level {
                        level: capacity[other].max(0.0) / active[other] as f64,
                        link: other,
                        version: version[other],
                    });
                }
            }
        }
    }
    rate
}

/// Max-min fair rates (bits per second) subject to every peer's upload and
/// download capacity and each flow's own cap, filled tier by tier.
pub fn allocate_bandwidth(flows: &[Flow], upload: &[f64], download: &[f64]) -> Vec<f64> {
    assert_eq!(upload.len(), download.len());
    let peers = upload.len();
    let mut capacity: Vec<f64> = upload.iter().chain(download.iter()).copied().collect();
    let mut rates = vec![0.0; flows.len()];
    let mut tiers: Vec<u8> = flows.iter().map(|f| f.tier).collect();
    tiers.sort_unstable();
    tiers.dedup();
    for phase in tiers {
        let idx: Vec<usize> = (0..flows.len()).filter(|&i| flows[i].tier == phase).collect();
        if idx.is_empty() {
            continue;
        }
        let mut caps = capacity.clone();
        let mut flow_links = Vec::with_capacity(idx.len());
        for &i in &idx {
            let f = &flows[i];
            let mut ls = vec![f.src, peers + f.dst];
            if let Some(c) = f.cap {
                ls.push(caps.len());
                caps.push(c);
            }
            flow_links.push(ls);
        }
        let r = water_fill(&flow_links, &mut caps);
        for (k, &i) in idx.iter().enumerate() {
            rates[i] = r[k];
            capacity[flows[i].src] -= r[k];
            capacity[peers + flows[i].dst] -= r[k];
        }
        for c in capacity.iter_mut() {
            *c = c.max(0.0);
        }
    }
    rates
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(src: usize, dst: usize) -> Flow {
        Flow {
            src,
            dst,
            cap: None,
            tier: 1,
        }
    }

    #[test]
    fn one_uploader_two_downloaders() {
        let r = allocate_bandwidth(&[flow(0, 1), flow(0, 2)], &[1e6; 3], &[8e6; 3]);
        assert_eq!(r, vec![5e5, 5e5]);
    }

    #[test]
    fn downlink_caps_many_uploaders() {
        let flows: Vec<Flow> = (1..=10).map(|s| flow(s, 0)).collect();
        let r = allocate_bandwidth(&flows, &[1e6; 11], &[8e6; 11]);
        let total: f64 = r.iter().sum();
        assert!((total - 8e6).abs() < 1e-6);
        assert!(r.iter().all(|&x| (x - 8e5).abs() < 1e-6));
    }

    #[test]
    fn priority_flows_take_the_uplink_first() {
        let mut helper = flow(0, 1);
        helper.tier = 0;
        let r = allocate_bandwidth(&[helper, flow(0, 2)], &[1e6; 3], &[8e6; 3]);
        assert_eq!(r, vec![1e6, 0.0]);
    }

    #[test]
    fn per_flow_cap_frees_capacity_for_others() {
        let mut capped = flow(0, 1);
        capped.cap = Some(2e5);
        let r = allocate_bandwidth(&[capped, flow(0, 2)], &[1e6; 3], &[8e6; 3]);
        assert!((r[0] - 2e5).abs() < 1e-9 && (r[1] - 8e5).abs() < 1e-9);
    }

    #[test]
    fn empty() {
        assert!(allocate_bandwidth(&[], &[1.0], &[1.0]).is_empty());
    }
}
