use hanabi_core::agents::Fanout;

/// Runs fan-out jobs on the rayon pool the caller is in.
#[derive(Clone, Copy, Debug, Default)]
pub struct RayonFanout;

impl Fanout for RayonFanout {
    fn run<'a>(&self, jobs: Vec<Box<dyn FnOnce() + Send + 'a>>) {
        rayon::scope(|s| {
            for job in jobs {
                s.spawn(move |_| job());
            }
        });
    }
}
