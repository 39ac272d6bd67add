import os
from setuptools import setup, find_packages
from qparity import __version__

install_requires = [
    'psutil>=5.6',
    'networkx>=2.5',
    'sympy>=1.7',
    'numpy>=1.17',
]

HERE = os.path.dirname(__file__)
try:
    long_description = open(os.path.join(HERE, 'README.rst')).read()
except:
    long_description = None

setup(
    name='qparity',
    version=__version__,
    packages=find_packages(exclude=['test']),
    package_data={'qparity': ['data/*.mdp', 'data/*.game']},

    description='qparity: energy-parity and mean-payoff-parity objectives in MDPs',
    long_description=long_description,

    license='MIT',

    keywords='mdp parity energy mean-payoff verification strategy synthesis',
    install_requires=install_requires,

    entry_points={
        'console_scripts': [
            'qparity = qparity.command:main'
        ]
    }
)
