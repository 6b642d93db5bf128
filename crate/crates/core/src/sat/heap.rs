//! Indexed binary max-heap of variables keyed by (edge variable, activity).

pub(crate) struct VarHeap {
    heap: Vec<u32>,
    index: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl VarHeap {
    pub fn new(vars: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(vars),
            index: vec![ABSENT; vars],
        }
    }

    #[inline]
    fn before(a: u32, b: u32, act: &[f64], edge: &[bool]) -> bool {
        let (a, b) = (a as usize, b as usize);
        match (edge[a], edge[b]) {
            (true, false) => true,
            (false, true) => false,
            _ => act[a] > act[b] || (act[a] == act[b] && a < b),
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.index[v as usize] != ABSENT
    }

    #[cfg(test)]
    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn insert(&mut self, v: u32, act: &[f64], edge: &[bool]) {
        if self.contains(v) {
            return;
        }
        self.index[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act, edge);
    }

    /// Restores the heap after the activity of `v` increased.
    pub fn increased(&mut self, v: u32, act: &[f64], edge: &[bool]) {
        if self.contains(v) {
            self.sift_up(self.index[v as usize] as usize, act, edge);
        }
    }

    pub fn pop(&mut self, act: &[f64], edge: &[bool]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.index[top as usize] = ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last as usize] = 0;
            self.sift_down(0, act, edge);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut pos: usize, act: &[f64], edge: &[bool]) {
        let v = self.heap[pos];
        while pos > 0 {
            let parent = (pos - 1) / 2;
            let p = self.heap[parent];
            if !Self::before(v, p, act, edge) {
                break;
            }
            self.heap[pos] = p;
            self.index[p as usize] = pos as u32;
            pos = parent;
        }
        self.heap[pos] = v;
        self.index[v as usize] = pos as u32;
    }

    fn sift_down(&mut self, mut pos: usize, act: &[f64], edge: &[bool]) {
        let v = self.heap[pos];
        let len = self.heap.len();
        loop {
            let l = 2 * pos + 1;
            if l >= len {
                break;
            }
            let r = l + 1;
            let child = if r < len && Self::before(self.heap[r], self.heap[l], act, edge) {
                r
            } else {
                l
            };
            let c = self.heap[child];
            if !Self::before(c, v, act, edge) {
                break;
            }
            self.heap[pos] = c;
            self.index[c as usize] = pos as u32;
            pos = child;
        }
        self.heap[pos] = v;
        self.index[v as usize] = pos as u32;
    }
}
