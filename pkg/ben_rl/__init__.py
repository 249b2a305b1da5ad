from gym import register

from .version import __version__

register(id='Tiger-v0', entry_point='ben_rl.Environments.TigerEnvironment:TigerEnvironment')
register(id='SearchRescue-v0', entry_point='ben_rl.Environments.SearchRescueEnvironment:SearchRescueEnvironment')
