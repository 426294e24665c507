from . import scene_runner
