from blinker import signal

# Sent by a fitter after each evaluation checkpoint.
checkpoint_recorded = signal("checkpoint-recorded")

# Sent by the harness after a run's artifacts are written.
fit_completed = signal("fit-completed")
