import warnings
from setuptools import setup

try:
    from Cython.Build import cythonize
    use_cython = True
except ImportError:
    warnings.warn('不使用cython')
    use_cython = False

setup(
    name='fairsketch',
    version='0.1.0',
    description='公平性审计、带公平约束的训练与 XDoG 素描预处理',
    long_description=open('README.md', encoding='utf-8').read(),
    long_description_content_type="text/markdown",
    license='MIT',
    packages=['fairsketch'],
    install_requires=[
        'numpy>=1.20',
        'Pillow>=8.0',
        'loguru>=0.6',
    ],
    extras_require={
        'test': ['pytest>=7.0'],
    },
    entry_points={
        'console_scripts': ['fairsketch=fairsketch.cli:run'],
    },
    ext_modules=cythonize(['fairsketch/record.py', 'fairsketch/validator.py'], language_level=3)
    if use_cython else [],
    classifiers=[
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
    ],
    python_requires='>=3.10',
)
