"""
Setup script for the Superlocality Toolkit.
This script installs dependencies, writes a configuration template and runs the checks.
"""

import subprocess
import sys
from pathlib import Path

ENV_TEMPLATE = """# Exact snapping of Born-rule boxes
SNAP_DENOMINATOR=32
SNAP_TOLERANCE=1e-9

# Float checks in the quantum front end
FLOAT_TOLERANCE=1e-10
WITNESS_TOLERANCE=1e-12

# Group deterministic witnesses into fewer strategies when searching
MERGE_ANALYSIS=true

# Output
RESULTS_DIR=results
LOG_LEVEL=WARNING
"""


def install_dependencies():
    """Install Python dependencies."""
    print("📦 Installing Python dependencies...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
        print("✅ Dependencies installed successfully")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install dependencies: {e}")
        return False


def create_directories():
    """Create the results directory."""
    print("📁 Creating directory structure...")
    Path("results").mkdir(parents=True, exist_ok=True)
    print("  ✅ Created: results")
    return True


def check_environment_file():
    """Write a .env template when none exists."""
    print("🔧 Checking environment configuration...")

    env_file = Path(".env")
    if env_file.exists():
        print("✅ .env file exists")
        return True

    env_file.write_text(ENV_TEMPLATE)
    print("📝 Created .env template with default settings.")
    return True


def run_system_test():
    """Run the smoke checks and the pytest suite."""
    print("🧪 Running system tests...")

    for command in ([sys.executable, "test_system.py"], [sys.executable, "-m", "pytest", "-q"]):
        try:
            result = subprocess.run(command, capture_output=True, text=True)
        except Exception as e:
            print(f"❌ Failed to run {' '.join(command)}: {e}")
            return False
        if result.returncode != 0:
            print(f"❌ {' '.join(command[1:])} failed:")
            print(result.stdout)
            print(result.stderr)
            return False

    print("✅ System tests passed!")
    return True


def main():
    """Main setup function."""
    print("🚀 Superlocality Toolkit Setup")
    print("=" * 50)

    steps = [
        ("Installing dependencies", install_dependencies),
        ("Creating directories", create_directories),
        ("Checking environment file", check_environment_file),
    ]

    all_passed = True
    for step_name, step_func in steps:
        print(f"\n{step_name}...")
        if not step_func():
            all_passed = False

    if all_passed and input("Run system tests? (y/n): ").lower() == 'y':
        run_system_test()

    print("\n" + "=" * 50)
    print("🎯 Setup Summary")
    print("=" * 50)

    if all_passed:
        print("✅ Basic setup completed successfully!")
        print("\n📋 Next steps:")
        print("1. Adjust .env if you need other snapping tolerances")
        print("2. Run: python main.py gen --family svf --param 1 > svf.json")
        print("3. Run: python main.py superlocal --in svf.json --d 2")
    else:
        print("⚠️ Setup completed with some issues.")
        print("Please resolve the above issues before running the toolkit.")


if __name__ == "__main__":
    main()
