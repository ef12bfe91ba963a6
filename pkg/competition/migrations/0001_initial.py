# Generated by Django 5.2.7 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('COMPETE', 'Single competition'), ('ENSEMBLE', 'Ensemble of replicas')], max_length=20)),
                ('config', models.JSONField()),
                ('seed', models.PositiveBigIntegerField()),
                ('status', models.CharField(choices=[('COMPLETED', 'Completed'), ('FAILED', 'Failed')], default='COMPLETED', max_length=20)),
                ('summary', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='ReplicaResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('index', models.PositiveIntegerField()),
                ('n', models.PositiveIntegerField()),
                ('total_edges', models.PositiveBigIntegerField()),
                ('a1', models.PositiveIntegerField()),
                ('a2', models.PositiveIntegerField()),
                ('n1', models.PositiveIntegerField()),
                ('n2', models.PositiveIntegerField()),
                ('frac1', models.FloatField()),
                ('frac2', models.FloatField()),
                ('sup_deviation', models.FloatField(blank=True, null=True)),
                ('qv', models.FloatField(blank=True, null=True)),
                ('min_growth', models.FloatField(blank=True, null=True)),
                ('termination_step', models.PositiveBigIntegerField()),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='replicas', to='competition.experimentrun')),
            ],
            options={
                'ordering': ['run', 'index'],
                'constraints': [models.UniqueConstraint(fields=('run', 'index'), name='unique_replica_per_run')],
            },
        ),
    ]
